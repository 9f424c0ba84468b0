"""Bundled example nets, faulty observers and the patterns checked on them."""
from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path

HERE = Path(__file__).resolve().parent
MUTANTS = HERE / "mutants"


def path(name: str) -> Path:
    """Path of a bundled net, e.g. ``path("doubleclick")``."""
    p = HERE / (name if name.endswith(".tts") else name + ".tts")
    if not p.exists():
        raise FileNotFoundError(f"no bundled fixture {name!r}")
    return p


@lru_cache(maxsize=None)
def manifest() -> dict:
    with open(HERE / "patterns.json", encoding="utf-8") as fh:
        return json.load(fh)


def names() -> list:
    return sorted(manifest())


def mutants() -> list:
    return sorted(MUTANTS.glob("*.tts"))
