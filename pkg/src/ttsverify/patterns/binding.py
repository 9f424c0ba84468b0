"""Resolve pattern events against a system net.

Binding checks that labels, places and store variables exist, drops
unknown labels unless ``strict`` is set, and adds the hidden start
transition when a pattern mentions ``init``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from ..expr import ExprTypeError, expr_vars, infer_type
from ..model import Net, Transition, TimeInterval
from .ast import (
    Implies, Init, LabelSet, PlaceEntry, PlaceExit, StorePredicate, events_of,
)

__all__ = ["BindingError", "Binding", "bind", "with_init", "INIT_LABEL", "INIT_TRANSITION"]

INIT_LABEL = "init"
INIT_TRANSITION = "__init"
PRE_PLACE = "__pre"
STARTED_PLACE = "__started"


class BindingError(ValueError):
    pass


@dataclass(frozen=True)
class Binding:
    system: Net  # the net as given
    net: Net  # the net the observer is composed with (init added when needed)
    pattern: object  # events resolved against ``net``
    strict: bool = False


def with_init(net: Net) -> Net:
    """Add a start transition labelled ``init`` that fires at time 0 before anything else."""
    if INIT_TRANSITION in net.trans_index:
        return net
    ts = [
        dataclasses.replace(t, read=tuple(t.read) + ((STARTED_PLACE, 1),))
        for t in net.transitions
    ]
    ts.insert(0, Transition(
        INIT_TRANSITION, INIT_LABEL, consume=[PRE_PLACE], produce=[STARTED_PLACE],
        interval=TimeInterval.point(0),
    ))
    marking = dict(net.initial_marking_map)
    marking[PRE_PLACE] = 1
    return Net(
        list(net.places) + [PRE_PLACE, STARTED_PLACE], ts, marking, net.schema,
        net.priorities, name=net.name, shared=net.shared, clocks=net.clocks,
    )


def _uses_init(p) -> bool:
    if isinstance(p, Implies):
        return _uses_init(p.antecedent) or _uses_init(p.consequent)
    return any(isinstance(e, Init) for _, e in events_of(p))


def _resolve(p, net: Net, strict: bool):
    if isinstance(p, Implies):
        return Implies(_resolve(p.antecedent, net, strict), _resolve(p.consequent, net, strict))
    labels = net.labels()
    types = {d.name: d.type for d in net.schema}
    changes = {}
    for field, e in events_of(p):
        if isinstance(e, Init):
            changes[field] = LabelSet([INIT_LABEL])
        elif isinstance(e, LabelSet):
            missing = sorted(e.labels - labels)
            if missing and strict:
                raise BindingError(f"unknown label{'s' if len(missing) > 1 else ''} {', '.join(missing)} in {net.name}")
            if not e.labels:
                raise BindingError("empty label set")
            changes[field] = LabelSet(e.labels & labels)
        elif isinstance(e, (PlaceEntry, PlaceExit)):
            if e.place not in net.place_index:
                raise BindingError(f"unknown place {e.place!r} in {net.name}")
        elif isinstance(e, StorePredicate):
            unknown = sorted(expr_vars(e.expr) - set(types))
            if unknown:
                raise BindingError(f"unknown variable {unknown[0]!r} in predicate {e}")
            try:
                ty = infer_type(e.expr, types)
            except ExprTypeError as err:
                raise BindingError(f"ill-typed predicate {e}: {err}") from None
            if ty != "bool":
                raise BindingError(f"predicate {e} is not boolean")
    return dataclasses.replace(p, **changes) if changes else p


def bind(pattern, net: Net, strict: bool = False) -> Binding:
    """Bind ``pattern`` to ``net``.

    With ``strict`` an unknown label is an error; otherwise it is dropped
    (an event whose labels are all unknown never occurs).
    """
    target = with_init(net) if _uses_init(pattern) else net
    return Binding(net, target, _resolve(pattern, target, strict), strict)
