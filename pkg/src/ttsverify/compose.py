"""Parallel composition of two nets.

Transitions carrying the same (non-silent) label on both sides are fused
pairwise; everything else is kept as is.  Places and stores are put side
by side.  :func:`compose_on_places` additionally identifies observer
"probe" places with system places before composing.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .expr import conj
from .model import Net, Transition

__all__ = ["CompositionError", "CompositionMap", "compose_tts", "compose_on_places", "fused_name"]


class CompositionError(ValueError):
    pass


def fused_name(left: str, right: str) -> str:
    return f"{left}|{right}"


@dataclass
class CompositionMap:
    left: Net
    right: Net
    shared_labels: frozenset
    place_origin: dict = field(default_factory=dict)  # composed place -> (side, name)
    origin: dict = field(default_factory=dict)  # composed transition -> (left name | None, right name | None)
    _names: dict = field(default_factory=dict)

    def composed_name(self, left: Optional[str], right: Optional[str]) -> str:
        return self._names[(left, right)]

    def side_transitions(self, side: str) -> dict:
        """Component transition name -> composed transitions built from it."""
        k = 0 if side == "left" else 1
        out: dict = {}
        for c, pair in self.origin.items():
            if pair[k] is not None:
                out.setdefault(pair[k], []).append(c)
        return out


def _fresh(name: str, taken: set) -> str:
    while name in taken:
        name += "'"
    return name


def _rename_arcs(arcs, ren) -> dict:
    return {ren[p]: k for p, k in arcs}


def _merge_arcs(a: dict, b: dict, combine=max) -> dict:
    out = dict(a)
    for p, k in b.items():
        out[p] = combine(out[p], k) if p in out else k
    return out


def _add(a, b):
    return a + b


def _merge_schema(n1: Net, n2: Net):
    decls = {}
    owners = {}
    for net in (n1, n2):
        for d in net.schema:
            owned = d.name not in net.shared
            if d.name in decls:
                prev = decls[d.name]
                if owned and owners[d.name]:
                    raise CompositionError(f"variable name clash: {d.name!r}")
                if (prev.type, prev.lo, prev.hi) != (d.type, d.lo, d.hi):
                    raise CompositionError(f"variable name clash: {d.name!r} declared with different types")
                if owned:
                    decls[d.name] = d
                    owners[d.name] = True
            else:
                decls[d.name] = d
                owners[d.name] = owned
    shared = {n for n, owned in owners.items() if not owned}
    return list(decls.values()), shared


def _clock(net: Net, t: Transition, ren, side: str):
    """Clock key and component transition (arcs renamed) for a copy of ``t``."""
    if t.name in net.clocks:
        key, comp = net.clocks[t.name]
    else:
        key, comp = t.name, t
    arcs = {f: _rename_arcs(getattr(comp, f), ren) for f in ("consume", "produce", "read", "inhibit")}
    return f"{side}:{key}", Transition(comp.name, comp.label, **arcs)


def _compose(n1: Net, n2: Net, identify: Optional[dict] = None):
    identify = dict(identify or {})
    shared_labels = frozenset(n1.labels() & n2.labels())
    for net in (n1, n2):
        for h, _ in net.priorities:
            lab = net.transition(h).label
            if lab is not None and lab in shared_labels:
                raise CompositionError(
                    f"priority-synchronization violation: {h!r} has priority and carries shared label {lab!r}"
                )
    schema, shared_vars = _merge_schema(n1, n2)
    cmap = CompositionMap(n1, n2, shared_labels)

    # places
    places, marking = [], {}
    ren1, ren2 = {}, {}
    for p in n1.places:
        ren1[p] = p
        places.append(p)
        cmap.place_origin[p] = ("left", p)
    taken = set(places)
    for p in n2.places:
        if p in identify:
            ren2[p] = identify[p]
            continue
        q = _fresh(p, taken)
        taken.add(q)
        ren2[p] = q
        places.append(q)
        cmap.place_origin[q] = ("right", p)
    for p, n in n1.initial_marking_map.items():
        marking[ren1[p]] = marking.get(ren1[p], 0) + n
    for p, n in n2.initial_marking_map.items():
        if p in identify:
            continue
        marking[ren2[p]] = marking.get(ren2[p], 0) + n

    # transitions
    clocks: dict = {}
    out: list = []
    tnames: set = set()
    from_left: dict = {}
    from_right: dict = {}

    def add(t: Transition, pair):
        out.append(t)
        tnames.add(t.name)
        cmap.origin[t.name] = pair
        cmap._names[pair] = t.name
        if pair[0] is not None:
            from_left.setdefault(pair[0], []).append(t.name)
        if pair[1] is not None:
            from_right.setdefault(pair[1], []).append(t.name)

    def renamed(t: Transition, ren, name):
        return Transition(
            name, t.label, _rename_arcs(t.consume, ren), _rename_arcs(t.produce, ren),
            _rename_arcs(t.read, ren), _rename_arcs(t.inhibit, ren), t.interval, t.pre, t.act,
        )

    for t in n1.transitions:
        if t.label is None or t.label not in shared_labels:
            add(renamed(t, ren1, t.name), (t.name, None))
            if t.name in n1.clocks:
                clocks[t.name] = _clock(n1, t, ren1, "left")
    for t in n2.transitions:
        if t.label is None or t.label not in shared_labels:
            name = _fresh(t.name, tnames | {u.name for u in n1.transitions})
            add(renamed(t, ren2, name), (None, t.name))
            if t.name in n2.clocks:
                clocks[name] = _clock(n2, t, ren2, "right")
    for t1 in n1.transitions:
        if t1.label is None or t1.label not in shared_labels:
            continue
        for t2 in n2.transitions:
            if t2.label != t1.label:
                continue
            iv = t1.interval.intersect(t2.interval)
            if iv is None:
                raise CompositionError(f"empty fused interval for {t1.name!r} and {t2.name!r}")
            name = _fresh(fused_name(t1.name, t2.name), tnames)
            # a side with the trivial interval must not reset the other side's clock
            if t2.interval.is_trivial and not t1.interval.is_trivial:
                clocks[name] = _clock(n1, t1, ren1, "left")
            elif t1.interval.is_trivial and not t2.interval.is_trivial:
                clocks[name] = _clock(n2, t2, ren2, "right")
            add(
                Transition(
                    name, t1.label,
                    _merge_arcs(_rename_arcs(t1.consume, ren1), _rename_arcs(t2.consume, ren2), _add),
                    _merge_arcs(_rename_arcs(t1.produce, ren1), _rename_arcs(t2.produce, ren2), _add),
                    _merge_arcs(_rename_arcs(t1.read, ren1), _rename_arcs(t2.read, ren2)),
                    _merge_arcs(_rename_arcs(t1.inhibit, ren1), _rename_arcs(t2.inhibit, ren2), min),
                    iv, conj(t1.pre, t2.pre), tuple(t1.act) + tuple(t2.act),
                ),
                (t1.name, t2.name),
            )

    prios = set()
    for net, table in ((n1, from_left), (n2, from_right)):
        for h, lo in net.priorities:
            for a in table.get(h, ()):
                for b in table.get(lo, ()):
                    prios.add((a, b))

    composed = Net(
        places, out, marking, schema, prios,
        name=f"{n1.name}*{n2.name}", shared=shared_vars, clocks=clocks,
    )
    return composed, cmap


def compose_tts(n1: Net, n2: Net):
    """Return ``(n1 o n2, CompositionMap)``.

    Fused transitions take the union of both arc sets, the intersection
    of both static intervals, the conjunction of the guards, and run the
    left action before the right one.
    """
    return _compose(n1, n2)


def compose_on_places(system: Net, observer: Net, place_pairs: Sequence[tuple] = ()):
    """Graft ``observer`` onto ``system`` identifying probe places.

    ``place_pairs`` lists ``(system place, observer place)``.  Probe places
    must not be produced into by the observer.  Label fusion then proceeds
    as in :func:`compose_tts`.
    """
    identify = {}
    for sp, op in place_pairs:
        if sp not in system.place_index:
            raise CompositionError(f"unknown system place {sp!r}")
        if op not in observer.place_index:
            raise CompositionError(f"unknown observer place {op!r}")
        for t in observer.transitions:
            if any(p == op for p, _ in t.produce):
                raise CompositionError(f"probe place {op!r} is produced into by observer transition {t.name!r}")
        identify[op] = sp
    return _compose(system, observer, identify)
