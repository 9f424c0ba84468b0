"""State class graph construction.

A state class pairs a marking and a store with the canonical system of
difference constraints on the firing times of the enabled transitions.
Classes are deduplicated syntactically on that canonical form.  Interval
endpoints are scaled to integers by the lcm of their denominators so the
kernel in :mod:`ttsverify.dbm` works on exact machine integers.
"""
from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Optional

from . import dbm
from .model import Net

__all__ = [
    "StateClass", "Scg", "CapExceeded", "Caps", "DEFAULT_CAPS", "timing",
    "initial_class", "class_fireables", "class_successor", "build_scg", "constraints",
]


@dataclass(frozen=True)
class Caps:
    max_classes: int = 1_000_000
    max_tokens: int = 8


DEFAULT_CAPS = Caps()


class CapExceeded(RuntimeError):
    """Exploration hit a cap; ``witness`` is the transition path that got there."""

    def __init__(self, reason: str, witness: list):
        super().__init__(f"cap exceeded: possibly unbounded net ({reason}); witness: {' '.join(witness) or '<initial>'}")
        self.reason = reason
        self.witness = witness


@dataclass(frozen=True)
class StateClass:
    marking: tuple
    store: tuple
    enabled: tuple  # transition indices, increasing
    domain: tuple  # closed flat matrix over (origin, *enabled)

    @property
    def size(self) -> int:
        return len(self.enabled) + 1


class _Timing:
    def __init__(self, net: Net):
        c = net.compiled
        dens = [iv.lo.denominator for iv in c.intervals]
        dens += [iv.hi.denominator for iv in c.intervals if iv.hi is not None]
        self.scale = lcm(*dens) if dens else 1
        self.los = []
        self.his = []
        for iv in c.intervals:
            self.los.append(dbm.encode(-int(iv.lo * self.scale), iv.lo_open))
            self.his.append(dbm.INF if iv.hi is None else dbm.encode(int(iv.hi * self.scale), iv.hi_open))


def timing(net: Net) -> _Timing:
    c = net.compiled
    t = c.__dict__.get("_timing")
    if t is None:
        t = c.__dict__["_timing"] = _Timing(net)
    return t


def initial_class(net: Net) -> StateClass:
    c = net.compiled
    tm = timing(net)
    m = net.initial_marking
    s = net.initial_store.values
    en = c.enabled_set(m, s)
    dom = dbm.initial_domain([tm.los[i] for i in en], [tm.his[i] for i in en])
    return StateClass(m, s, en, dom)


def _fire_domain(cls: StateClass, i: int, net: Net):
    c = net.compiled
    pos = {t: k + 1 for k, t in enumerate(cls.enabled)}
    a = pos[i]
    doms = [pos[h] for h in c.dominators[i] if h in pos]
    return dbm.fire_domain(cls.domain, cls.size, a, doms)


def _fireable_indices(cls: StateClass, net: Net) -> list:
    return [i for i in cls.enabled if _fire_domain(cls, i, net) is not None]


def class_fireables(cls: StateClass, net: Net) -> set:
    """Transitions that can fire first from some point of the class: no
    enabled transition is forced earlier, and every enabled higher-priority
    transition is strictly later."""
    return {net.transitions[i].name for i in _fireable_indices(cls, net)}


def _successor(cls: StateClass, i: int, net: Net, closed=None) -> StateClass:
    c = net.compiled
    tm = timing(net)
    if closed is None:
        closed = _fire_domain(cls, i, net)
        if closed is None:
            raise ValueError(f"transition {net.transitions[i].name!r} is not fireable from this class")
    m, s, after, persistent, fresh = c.fire_discrete(i, cls.marking, cls.store, cls.enabled)
    pos = {t: k + 1 for k, t in enumerate(cls.enabled)}
    keep, los, his = [], [], []
    for u in after:
        if u in persistent:
            keep.append(pos[persistent[u]])
            los.append(0)
            his.append(0)
        else:
            keep.append(-1)
            los.append(tm.los[u])
            his.append(tm.his[u])
    dom = dbm.successor(closed, cls.size, pos[i], keep, los, his)
    return StateClass(m, s, after, dom)


def class_successor(cls: StateClass, t: str, net: Net) -> StateClass:
    return _successor(cls, net.trans_index[t], net)


@dataclass
class Scg:
    net: Net
    classes: list
    edges: list  # (source id, transition index, target id)
    parent: list  # first edge discovering each class, or None for the initial one
    scale: int

    initial = 0

    @property
    def class_count(self) -> int:
        return len(self.classes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def size(self) -> int:
        return len(self.classes) + len(self.edges)

    def path_to(self, k: int) -> list:
        """Edges from the initial class to class ``k`` along discovery order."""
        path = []
        while self.parent[k] is not None:
            e = self.parent[k]
            path.append(e)
            k = e[0]
        return path[::-1]

    def label_of(self, i: int):
        return self.net.transitions[i].label

    def succ(self) -> dict:
        out: dict = {}
        for a, t, b in self.edges:
            out.setdefault(a, []).append((t, b))
        return out

    def to_json(self) -> dict:
        net = self.net
        return {
            "classes": [
                {
                    "id": k,
                    "marking": net.marking_dict(c.marking),
                    "store": {d.name: v for d, v in zip(net.schema, c.store)},
                    "constraints": constraints(c, net, self.scale),
                }
                for k, c in enumerate(self.classes)
            ],
            "edges": [{"from": a, "transition": net.transitions[t].name, "to": b} for a, t, b in self.edges],
        }

    def dump_text(self) -> str:
        lines = []
        data = self.to_json()
        for c in data["classes"]:
            mark = " ".join(f"{p}*{n}" if n > 1 else p for p, n in c["marking"].items()) or "-"
            store = " ".join(f"{k}={str(v).lower()}" for k, v in c["store"].items())
            lines.append(f"class {c['id']}")
            lines.append(f"  marking {mark}")
            if store:
                lines.append(f"  store {store}")
            for con in c["constraints"]:
                lines.append(f"  {con}")
        lines.append("edges")
        for e in data["edges"]:
            lines.append(f"  {e['from']} --{e['transition']}--> {e['to']}")
        return "\n".join(lines) + "\n"

    def dump_json(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def _fmt_bound(b, scale):
    v, strict = dbm.decode(b)
    x = Fraction(v, scale)
    return x, strict


def constraints(cls: StateClass, net: Net, scale: Optional[int] = None) -> list:
    """Human-readable constraints of a class (bounds and finite differences)."""
    scale = scale or timing(net).scale
    names = ["0"] + [net.transitions[i].name for i in cls.enabled]
    n = cls.size
    out = []
    for v in range(1, n):
        lo_x, lo_s = _fmt_bound(cls.domain[v], scale)
        hi = cls.domain[v * n]
        lo = f"{-lo_x} {'<' if lo_s else '<='} {names[v]}"
        if hi >= dbm.INF:
            out.append(lo)
        else:
            hx, hs = _fmt_bound(hi, scale)
            out.append(f"{lo} {'<' if hs else '<='} {hx}")
    for i in range(1, n):
        for j in range(1, n):
            if i == j:
                continue
            b = cls.domain[i * n + j]
            if b >= dbm.INF:
                continue
            x, s = _fmt_bound(b, scale)
            out.append(f"{names[i]} - {names[j]} {'<' if s else '<='} {x}")
    return out


def build_scg(net: Net, caps: Caps = DEFAULT_CAPS, shuffle_seed: Optional[int] = None) -> Scg:
    """Breadth-first closure from the initial class.

    Raises :class:`CapExceeded` when the class count or a place's token
    count passes its cap.  ``shuffle_seed`` randomises the order in which
    successors are generated (the resulting graph is isomorphic).
    """
    tm = timing(net)
    rng = random.Random(shuffle_seed) if shuffle_seed is not None else None
    init = initial_class(net)
    classes = [init]
    index = {init: 0}
    parent: list = [None]
    edges = []
    queue = deque([0])

    def witness(k, extra=None):
        path = [net.transitions[t].name for _, t, _ in Scg(net, classes, edges, parent, tm.scale).path_to(k)]
        return path + ([extra] if extra else [])

    while queue:
        k = queue.popleft()
        cls = classes[k]
        order = list(cls.enabled)
        if rng is not None:
            rng.shuffle(order)
        for i in order:
            closed = _fire_domain(cls, i, net)
            if closed is None:
                continue
            nxt = _successor(cls, i, net, closed)
            if nxt.marking and max(nxt.marking) > caps.max_tokens:
                raise CapExceeded(f"more than {caps.max_tokens} tokens in a place", witness(k, net.transitions[i].name))
            j = index.get(nxt)
            if j is None:
                if len(classes) >= caps.max_classes:
                    raise CapExceeded(f"more than {caps.max_classes} classes", witness(k, net.transitions[i].name))
                j = len(classes)
                index[nxt] = j
                classes.append(nxt)
                parent.append((k, i, j))
                queue.append(j)
            edges.append((k, i, j))
    return Scg(net, classes, edges, parent, tm.scale)
