"""Pattern checking on the state class graph.

``check`` binds a pattern, builds its observer, grafts it onto the system
and explores the state class graph of the product: the pattern holds iff
no edge fires a transition carrying the observer's error label.  A
violation comes with a concrete timed trace obtained by solving the
firing-time constraints collected along the offending path.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import dbm
from .compose import compose_on_places
from .model import Net
from .patterns.ast import Implies, PlaceEntry, PlaceExit, events_of
from .patterns.binding import bind
from .patterns.grammar import parse_pattern
from .patterns.observers import Observer, ObserverMeta, build_observer, supported_variants
from .scg import DEFAULT_CAPS, Caps, _fire_domain, _successor, build_scg
from .semantics import SemanticsError, TimedTrace, initial_state, is_delay, project, run

__all__ = [
    "Verdict", "ObserverMeta", "InnocuousReport", "CounterexampleError", "check", "choose_variant",
    "extract_counterexample", "check_innocuous", "complexity", "bench",
]


class CounterexampleError(RuntimeError):
    pass


def _trace_json(sigma: Optional[TimedTrace]):
    if sigma is None:
        return None
    return [{"delay": str(it)} if is_delay(it) else {"event": it} for it in sigma]


@dataclass
class Verdict:
    holds: bool
    counterexample: Optional[TimedTrace] = None  # run of the product net
    system_trace: Optional[TimedTrace] = None  # its projection on the system
    stats: dict = field(default_factory=dict)
    sub_verdicts: tuple = ()
    pattern: str = ""
    variant: str = ""
    net: Optional[Net] = None  # the product net, kept for replay
    system: Optional[Net] = None  # the system as bound (with init when used)

    def to_json(self) -> dict:
        stats = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.stats.items()}
        return {
            "pattern": self.pattern,
            "variant": self.variant,
            "holds": self.holds,
            "counterexample": _trace_json(self.counterexample),
            "system_trace": _trace_json(self.system_trace),
            "stats": stats,
            "sub_verdicts": [v.to_json() for v in self.sub_verdicts],
        }


def choose_variant(p) -> str:
    """``place`` for leadsto on places, ``data`` otherwise."""
    if any(isinstance(e, (PlaceEntry, PlaceExit)) for _, e in events_of(p)) and "place" in supported_variants(p):
        return "place"
    return "data"


def _graft(system: Net, obs: Observer):
    return compose_on_places(system, obs.net, obs.sync.place_pairs)


def check(system: Net, p, variant: str = "auto", binding=None, caps: Caps = DEFAULT_CAPS,
          deterministic: bool = True, strict: bool = False) -> Verdict:
    """Decide whether ``system`` satisfies pattern ``p`` (text or AST).

    An implication is decided at the system level: it holds when the
    antecedent fails on the system or the consequent holds.
    """
    if isinstance(p, str):
        p = parse_pattern(p)
    t0 = time.perf_counter()
    if isinstance(p, Implies):
        a = check(system, p.antecedent, variant, None, caps, deterministic, strict)
        b = check(system, p.consequent, variant, None, caps, deterministic, strict)
        holds = (not a.holds) or b.holds
        stats = {"wall_time": time.perf_counter() - t0}
        return Verdict(
            holds, None if holds else b.counterexample, None if holds else b.system_trace, stats,
            (a, b), str(p), variant, b.net, b.system,
        )
    b = binding if binding is not None else bind(p, system, strict)
    q = b.pattern
    if variant == "auto":
        variant = choose_variant(q)
    obs = build_observer(q, variant, b, deterministic)
    composed, cmap = _graft(b.net, obs)
    sys_g = build_scg(b.net, caps)
    g = build_scg(composed, caps)
    err = {i for i, t in enumerate(composed.transitions) if t.label == obs.error_label}
    hit = next((e for e in g.edges if e[1] in err), None)
    stats = {
        "system_size": sys_g.size,
        "system_classes": sys_g.class_count,
        "composed_size": g.size,
        "classes_explored": g.class_count,
        "edges": g.edge_count,
        "complexity": Fraction(g.size, sys_g.size),
        "backend": dbm.BACKEND,
    }
    v = Verdict(True, stats=stats, pattern=str(p), variant=variant, net=composed, system=b.net)
    if hit is not None:
        path = g.path_to(hit[0]) + [hit]
        sigma = extract_counterexample(composed, [t for _, t, _ in path])
        v.holds = False
        v.counterexample = sigma
        v.system_trace = project(sigma, "left", cmap)
    stats["wall_time"] = time.perf_counter() - t0
    return v


# -- counterexamples ---------------------------------------------------------

def _path_constraints(net: Net, path: list):
    """Difference constraints on absolute firing times ``T_0 = 0, T_1 .. T_n``.

    Each entry is ``(i, j, (c, e))`` meaning ``T_j - T_i <= c + e*eps``.
    """
    c = net.compiled
    m, s = net.initial_marking, net.initial_store.values
    enabled = c.enabled_set(m, s)
    since = {u: 0 for u in enabled}  # step at which each enabled transition got enabled
    out = []
    for k, i in enumerate(path, start=1):
        if i not in since:
            raise CounterexampleError(f"{net.transitions[i].name} is not enabled at step {k}")
        out.append((k, k - 1, (Fraction(0), 0)))  # T_{k-1} <= T_k
        iv = c.intervals[i]
        e = since[i]
        out.append((e, k, (Fraction(iv.hi), -1 if iv.hi_open else 0)) if iv.hi is not None else None)
        out.append((k, e, (-iv.lo, -1 if iv.lo_open else 0)))
        for u, eu in since.items():
            ivu = c.intervals[u]
            if u != i and ivu.hi is not None:
                out.append((eu, k, (Fraction(ivu.hi), -1 if ivu.hi_open else 0)))
        for h in c.dominators[i]:
            if h in since:
                ivh = c.intervals[h]
                # h must not be ready yet: T_k - T_e(h) < lo_h (<= when lo_h is open)
                out.append((since[h], k, (ivh.lo, 0 if ivh.lo_open else -1)))
        m, s, after, persistent, fresh = c.fire_discrete(i, m, s, enabled)
        since = {u: since[v] for u, v in persistent.items()}
        since.update((u, k) for u in fresh)
        enabled = after
    return [x for x in out if x is not None]


def _earliest(n: int, cons):
    """``x_j = -dist(j -> 0)`` over weights ``(c, e)`` compared lexicographically."""
    inf = None
    dist = [inf] * (n + 1)
    dist[0] = (Fraction(0), 0)
    # x_j - x_i <= w  is edge i -> j; distance *to* 0 is a shortest path on reversed edges
    redges = [(j, i, w) for i, j, w in cons]
    for _ in range(n + 1):
        changed = False
        for a, b, w in redges:
            if dist[a] is None:
                continue
            cand = (dist[a][0] + w[0], dist[a][1] + w[1])
            if dist[b] is None or cand < dist[b]:
                dist[b] = cand
                changed = True
        if not changed:
            break
    else:
        raise CounterexampleError("inconsistent path constraints")
    # lower bound x_j >= -dist(j -> 0); unconstrained steps fall back to ordering
    return [(-d[0], -d[1]) if d is not None else (Fraction(0), 0) for d in dist]


def extract_counterexample(net: Net, path) -> TimedTrace:
    """Timed trace firing ``path`` (transition indices or names) at the
    earliest feasible dates; checked by replay."""
    path = [net.trans_index[t] if isinstance(t, str) else t for t in path]
    if not path:
        return TimedTrace()
    cons = _path_constraints(net, path)
    sol = _earliest(len(path), cons)
    # ordering may pull an unconstrained step below its predecessor: fix monotonically
    eps = Fraction(1, 2)
    gaps = [abs(v) for v, _ in sol if v] + [abs(w[0]) for _, _, w in cons if w[0]]
    if gaps:
        eps = min(gaps) / (4 * (len(path) + 2))
    s0 = initial_state(net)
    for _ in range(40):
        times = [v + e * eps for v, e in sol]
        for k in range(1, len(times)):
            times[k] = max(times[k], times[k - 1])
        items: list = []
        for k, i in enumerate(path, start=1):
            d = times[k] - times[k - 1]
            if d:
                items.append(d)
            items.append(net.transitions[i].name)
        sigma = TimedTrace(items)
        try:
            run(s0, sigma, net)
            return sigma
        except SemanticsError:
            eps /= 2
    raise CounterexampleError("no replayable timing found for the path")


# -- innocuousness -------------------------------------------------------------

@dataclass
class InnocuousReport:
    trivial_sync: bool
    always_fireable: bool
    no_immediate_cycle: bool
    details: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.trivial_sync and self.always_fireable and self.no_immediate_cycle

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "conditions": {
                "trivial_sync": self.trivial_sync,
                "always_fireable": self.always_fireable,
                "no_immediate_cycle": self.no_immediate_cycle,
            },
            "details": list(self.details),
        }

    def __str__(self):
        rows = [
            ("1 sync transitions have [0,inf[ and dominate nothing", self.trivial_sync),
            ("2 every sync label fireable after zero-delay internal steps", self.always_fireable),
            ("3 no cycle of immediate transitions", self.no_immediate_cycle),
        ]
        out = [f"{'PASS' if ok else 'FAIL'}  {text}" for text, ok in rows]
        out += ["  " + d for d in self.details]
        return "\n".join(out)


def _zero_delay(cls, i, net):
    """Closed firing domain of ``i`` restricted to firing without delay."""
    n = cls.size
    pos = cls.enabled.index(i) + 1
    d = list(cls.domain)
    d[pos * n] = min(d[pos * n], dbm.encode(0, False))
    d = dbm.canonical(tuple(d), n)
    if d is None:
        return None
    from .scg import StateClass
    return _fire_domain(StateClass(cls.marking, cls.store, cls.enabled, d), i, net)


def check_innocuous(observer, meta: Optional[ObserverMeta] = None, caps: Caps = DEFAULT_CAPS,
                    sync_labels=None) -> InnocuousReport:
    """Check the three sufficient conditions for an observer not to restrict
    the system it watches.

    ``observer`` is an :class:`Observer` or a net; ``meta`` (or
    ``sync_labels``) names the synchronised labels when a bare net is given.
    """
    if isinstance(observer, Observer):
        meta = meta or observer.meta
        net = observer.net
    else:
        net = observer
        if meta is None:
            meta = ObserverMeta.of(net, sync_labels or ())
    details = []
    # 1: static
    ok1 = True
    for name in sorted(meta.t_sync):
        t = net.transition(name)
        if not t.interval.is_trivial:
            ok1 = False
            details.append(f"sync transition {name} has interval {t.interval}")
        for h, lo in net.priorities:
            if h == name:
                ok1 = False
                details.append(f"sync transition {name} has priority over {lo}")
    imm = {net.trans_index[t] for t in meta.t_imm}
    g = build_scg(net, caps)
    by_label: dict = {}
    for name in meta.t_sync:
        by_label.setdefault(net.transition(name).label, set()).add(net.trans_index[name])
    # 2: from every class, each sync label fires after at most |T_imm|+1 zero-delay internal steps
    ok2 = True
    bound = len(imm) + 1
    sync_idx = set().union(*by_label.values()) if by_label else set()
    for k, cls in enumerate(g.classes):
        for lab in sorted(by_label, key=str):
            frontier, seen, found = [cls], {cls}, False
            for _ in range(bound + 1):
                nxt = []
                for c in frontier:
                    for i in c.enabled:
                        dom = _zero_delay(c, i, net)
                        if dom is None:
                            continue
                        if i in by_label[lab]:
                            found = True
                            break
                        if i in sync_idx:
                            continue
                        succ = _successor(c, i, net, dom)
                        if succ not in seen:
                            seen.add(succ)
                            nxt.append(succ)
                    if found:
                        break
                if found or not nxt:
                    break
                frontier = nxt
            if not found:
                ok2 = False
                details.append(f"label {lab} cannot fire without delay from class {k}")
    # 3: a cycle of immediate edges means a zero-time loop
    adj: dict = {}
    for a, t, b in g.edges:
        if t in imm:
            adj.setdefault(a, []).append(b)
    ok3 = True
    cyc = _find_cycle(adj)
    if cyc is not None:
        ok3 = False
        details.append("immediate cycle through classes " + " -> ".join(map(str, cyc)))
    return InnocuousReport(ok1, ok2, ok3, details)


def _find_cycle(adj: dict):
    colour: dict = {}
    for root in list(adj):
        if colour.get(root):
            continue
        stack = [(root, iter(adj.get(root, ())))]
        colour[root] = 1
        path = [root]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                colour[node] = 2
                stack.pop()
                path.pop()
                continue
            c = colour.get(nxt, 0)
            if c == 1:
                return path[path.index(nxt):] + [nxt]
            if c == 0:
                colour[nxt] = 1
                stack.append((nxt, iter(adj.get(nxt, ()))))
                path.append(nxt)
    return None


# -- complexity -------------------------------------------------------------

def complexity(system: Net, observer, caps: Caps = DEFAULT_CAPS, place_pairs=()) -> Fraction:
    """Size of the product's class graph over the system's (size = classes + edges)."""
    if isinstance(observer, Observer):
        composed, _ = _graft(system, observer)
    else:
        composed, _ = compose_on_places(system, observer, place_pairs)
    return Fraction(build_scg(composed, caps).size, build_scg(system, caps).size)


def bench(system: Net, p, variants=("data", "place"), caps: Caps = DEFAULT_CAPS,
          strict: bool = False, deterministic: bool = True) -> list:
    """One row per observer variant: sizes, C_O(S), verdict and time."""
    variants = list(variants)
    if len(variants) < 2:
        raise ValueError("bench compares at least two observer variants")
    if isinstance(p, str):
        p = parse_pattern(p)
    b = bind(p, system, strict)
    rows = []
    for var in variants:
        t0 = time.perf_counter()
        v = check(system, p, var, b, caps, deterministic, strict)
        st = v.stats
        rows.append({
            "variant": var,
            "classes": st["classes_explored"],
            "edges": st["edges"],
            "size": st["composed_size"],
            "system_size": st["system_size"],
            "complexity": st["complexity"],
            "holds": v.holds,
            "time": time.perf_counter() - t0,
        })
    return rows


def format_bench(rows) -> str:
    head = f"{'variant':<12}{'classes':>9}{'edges':>9}{'C_O(S)':>12}{'holds':>7}{'time(s)':>10}"
    lines = [head]
    for r in rows:
        c = r["complexity"]
        lines.append(
            f"{r['variant']:<12}{r['classes']:>9}{r['edges']:>9}{float(c):>12.4f}"
            f"{str(r['holds']).lower():>7}{r['time']:>10.3f}"
        )
    return "\n".join(lines)
