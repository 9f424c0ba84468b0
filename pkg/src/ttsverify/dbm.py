"""Difference-bound kernel selection.

The compiled ``_dbm`` extension is used when it was built; otherwise the
pure-Python ``_dbm_py`` module provides the same functions.  Setting
``TTSVERIFY_PURE=1`` forces the fallback.
"""
import os

from . import _dbm_py

if os.environ.get("TTSVERIFY_PURE"):
    _impl = _dbm_py
else:
    try:
        from . import _dbm as _impl  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        _impl = _dbm_py

BACKEND = "compiled" if _impl is not _dbm_py else "python"
INF = _dbm_py.INF
encode = _dbm_py.encode
add = _dbm_py.add
canonical = _impl.canonical
fire_domain = _impl.fire_domain
successor = _impl.successor
initial_domain = _impl.initial_domain


def decode(b):
    """``(value, strict)`` for a finite encoded bound, None for +inf."""
    if b >= INF:
        return None
    return b >> 1, not (b & 1)
