"""Trace semantics of patterns, used as ground truth for the observers.

A finite trace is *violating* when it already contains a violation that
no extension can repair; a trace that is merely unfinished (an E1 still
inside its deadline, say) is not violating.  All patterns are safety
properties read this way, so a system satisfies a pattern iff none of
its finite traces is violating.

Events are read off a trace as a sequence of *ticks*.  A transition
produces one tick carrying the label roles it plays.  Then the state it
leads to produces a tick for every state event that becomes true there
(entry).  For the E2 of the leadsto family, a state event counts when the
state is followed by a positive delay, i.e. the system actually rests in
it.  Within a tick, roles are processed in the order that makes the
"strictly after" reading of each pattern hold.

Two evaluators share that reading but not their logic:
:func:`oracle_eval` applies the quantified definitions to a whole trace,
while the monitors behind :func:`bounded_verdict` consume ticks one at a
time and explore a net's digitised state space with memoisation.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from ..expr import evaluate
from ..model import Net, TimeInterval
from ..semantics import (
    TimedTrace, default_grid, elapse, fire, fireables, initial_state, is_delay, iter_bounded,
    states_along,
)
from .ast import (
    AbsentAfter, AbsentBeforeDur, Implies, Init, LabelSet, LeadsTo, LeadsToFirstAfter,
    LeadsToFirstBefore, PlaceEntry, PlaceExit, PresentAfter, PresentFirstBefore, PresentLasting,
    StorePredicate, events_of, is_state_event,
)
from .binding import INIT_LABEL, Binding, bind

__all__ = [
    "oracle_eval", "bounded_verdict", "enumerated_verdict", "OracleResult", "ticks_of",
    "monitor_for", "holds_now",
]

_LEADSTO = (LeadsTo, LeadsToFirstBefore, LeadsToFirstAfter)


def holds_now(e, net: Net, state) -> bool:
    """Truth of a state event in ``state``."""
    if isinstance(e, PlaceEntry):
        return state.marking[net.place_index[e.place]] >= 1
    if isinstance(e, PlaceExit):
        return state.marking[net.place_index[e.place]] == 0
    if isinstance(e, StorePredicate):
        return bool(evaluate(e.expr, state.store))
    raise TypeError(f"{e} is not a state event")


class _Roles:
    """Which roles a transition label or a state produces for a pattern."""

    def __init__(self, p, net: Net):
        self.net = net
        self.by_label: dict = {}
        self.state_roles = []  # (role, event, presence?)
        for role, e in events_of(p):
            if isinstance(e, Init):
                e = LabelSet([INIT_LABEL])
            if isinstance(e, LabelSet):
                for lab in e.labels:
                    self.by_label.setdefault(lab, set()).add(role)
            elif is_state_event(e):
                presence = role == "e2" and isinstance(p, _LEADSTO)
                self.state_roles.append((role, e, presence))
        self.by_label = {k: frozenset(v) for k, v in self.by_label.items()}

    def event(self, name: str) -> frozenset:
        lab = self.net.transition(name).label
        return self.by_label.get(lab, frozenset()) if lab is not None else frozenset()

    def entry(self, before, after) -> frozenset:
        out = set()
        for role, e, presence in self.state_roles:
            if presence:
                continue
            if holds_now(e, self.net, after) and (before is None or not holds_now(e, self.net, before)):
                out.add(role)
        return frozenset(out)

    def presence(self, state) -> frozenset:
        return frozenset(
            role for role, e, presence in self.state_roles if presence and holds_now(e, self.net, state)
        )


def ticks_of(p, sigma, net: Net):
    """``(ticks, total duration)`` where ticks are ``(time, roles)`` in trace order."""
    sigma = TimedTrace(sigma)
    roles = _Roles(p, net)
    need_states = bool(roles.state_roles)
    states = states_along(initial_state(net), sigma, net) if need_states else None
    ticks = []
    t = Fraction(0)
    if need_states:
        ticks.append((t, roles.entry(None, states[0])))
    for j, item in enumerate(sigma):
        if is_delay(item):
            if item == 0:
                continue
            if need_states:
                ticks.append((t, roles.presence(states[j])))
            t += item
        else:
            ticks.append((t, roles.event(item)))
            if need_states:
                ticks.append((t, roles.entry(states[j], states[j + 1])))
    return [tk for tk in ticks if tk[1]], t


def _past(iv: TimeInterval, d) -> bool:
    """No delay >= d can still land in ``iv``."""
    if iv.hi is None:
        return False
    return d > iv.hi or (d == iv.hi and iv.hi_open)


def _leadsto_ok(ticks, T, iv, e1_from: int = -1, e3_limit: Optional[int] = None) -> bool:
    occ1 = [(k, t) for k, (t, r) in enumerate(ticks) if "e1" in r and k > e1_from]
    occ2 = [(k, t) for k, (t, r) in enumerate(ticks) if "e2" in r]
    for k1, t1 in occ1:
        if e3_limit is not None and k1 >= e3_limit:
            continue
        nxt = next(((k, t) for k, t in occ2 if k > k1), None)
        if e3_limit is not None:
            if nxt is None or nxt[0] >= e3_limit or nxt[1] - t1 not in iv:
                return False
        elif nxt is not None:
            if nxt[1] - t1 not in iv:
                return False
        elif _past(iv, T - t1):
            return False
    return True


def _first(ticks, role):
    return next(((k, t) for k, (t, r) in enumerate(ticks) if role in r), None)


def oracle_eval(p, sigma, binding) -> bool:
    """True unless the finite trace ``sigma`` already violates ``p``.

    ``binding`` is a :class:`Binding` or the net the trace belongs to.
    Implications are decided over whole systems (see :func:`bounded_verdict`).
    """
    if isinstance(binding, Net):
        binding = bind(p, binding)
    net = binding.net
    if isinstance(p, Implies):
        raise ValueError("implication is decided over all traces of a system, not on one trace")
    if isinstance(p, PresentLasting):
        return _lasting_ok(p, TimedTrace(sigma), net)
    ticks, T = ticks_of(p, sigma, net)
    if isinstance(p, LeadsTo):
        return _leadsto_ok(ticks, T, p.interval)
    if isinstance(p, LeadsToFirstBefore):
        f3 = _first(ticks, "e3")
        return f3 is None or _leadsto_ok(ticks, T, p.interval, e3_limit=f3[0])
    if isinstance(p, LeadsToFirstAfter):
        f3 = _first(ticks, "e3")
        return f3 is None or _leadsto_ok(ticks, T, p.interval, e1_from=f3[0])
    if isinstance(p, AbsentAfter):
        f1 = _first(ticks, "e1")
        if f1 is None:
            return True
        return not any(k > f1[0] and t - f1[1] in p.interval for k, (t, r) in enumerate(ticks) if "e2" in r)
    if isinstance(p, PresentAfter):
        f2 = _first(ticks, "e2")
        if f2 is None:
            return True
        if any(k > f2[0] and t - f2[1] in p.interval for k, (t, r) in enumerate(ticks) if "e1" in r):
            return True
        return not _past(p.interval, T - f2[1])
    if isinstance(p, PresentFirstBefore):
        f2 = _first(ticks, "e2")
        if f2 is None:
            return True
        f1 = _first(ticks, "e1")
        return f1 is not None and f1[0] < f2[0] and f2[1] - f1[1] in p.interval
    if isinstance(p, AbsentBeforeDur):
        f2 = _first(ticks, "e2")
        if f2 is None:
            return True
        return not any(k < f2[0] and f2[1] - t < p.duration for k, (t, r) in enumerate(ticks) if "e1" in r)
    raise TypeError(f"not a pattern: {p!r}")


def _lasting_ok(p: PresentLasting, sigma, net) -> bool:
    states = states_along(initial_state(net), sigma, net)
    times = [Fraction(0)]
    for item in sigma:
        times.append(times[-1] + (item if is_delay(item) else 0))
    k0 = next((k for k, s in enumerate(states) if holds_now(p.e1, net, s)), None)
    if k0 is None:
        return True
    return all(
        holds_now(p.e1, net, states[k]) for k in range(k0 + 1, len(states)) if times[k] - times[k0] < p.duration
    )


# -- streaming monitors --------------------------------------------------------
# A monitor state is a hashable tuple whose last entry is the sticky
# violation flag.  Ages are capped at ``cap`` (larger than every constant of
# the pattern), which keeps the explored state space finite.

class _Monitor:
    def __init__(self, p, cap):
        self.p = p
        self.cap = cap

    def age(self, a, d):
        return None if a is None else min(a + d, self.cap)

    def bad(self, m) -> bool:
        return m[-1]


class _LeadsToMon(_Monitor):
    # (pending: age of the oldest unanswered E1, last: age of the newest, bad)
    def init(self):
        return (None, None, False)

    def answer(self, pend, last):
        iv = self.p.interval
        return pend in iv and last in iv

    def tick(self, m, roles):
        pend, last, bad = m
        if "e2" in roles and pend is not None:
            bad = bad or not self.answer(pend, last)
            pend = last = None
        if "e1" in roles:
            last = Fraction(0)
            if pend is None:
                pend = Fraction(0)
        return (pend, last, bad)

    def delay(self, m, d):
        pend, last, bad = m
        pend, last = self.age(pend, d), self.age(last, d)
        return (pend, last, bad or (pend is not None and _past(self.p.interval, pend)))


class _FirstBeforeMon(_LeadsToMon):
    # (pending, last, late-or-early seen, E3 seen, bad)
    def init(self):
        return (None, None, False, False, False)

    def tick(self, m, roles):
        pend, last, viol, done, bad = m
        if done:
            return m
        if "e3" in roles:
            return (None, None, viol, True, bad or viol or pend is not None)
        if "e2" in roles and pend is not None:
            viol = viol or not self.answer(pend, last)
            pend = last = None
        if "e1" in roles:
            last = Fraction(0)
            if pend is None:
                pend = Fraction(0)
        return (pend, last, viol, done, bad)

    def delay(self, m, d):
        pend, last, viol, done, bad = m
        pend, last = self.age(pend, d), self.age(last, d)
        return (pend, last, viol or (pend is not None and _past(self.p.interval, pend)), done, bad)


class _FirstAfterMon(_LeadsToMon):
    # (E3 seen, pending, last, bad)
    def init(self):
        return (False, None, None, False)

    def tick(self, m, roles):
        act, pend, last, bad = m
        if act:
            pend, last, bad = _LeadsToMon.tick(self, (pend, last, bad), roles)
        return ("e3" in roles or act, pend, last, bad)

    def delay(self, m, d):
        act, pend, last, bad = m
        return (act,) + _LeadsToMon.delay(self, (pend, last, bad), d)


class _AbsentAfterMon(_Monitor):
    # (age of the first E1, bad)
    def init(self):
        return (None, False)

    def tick(self, m, roles):
        armed, bad = m
        if "e2" in roles and armed is not None and armed in self.p.interval:
            bad = True
        if "e1" in roles and armed is None:
            armed = Fraction(0)
        return (armed, bad)

    def delay(self, m, d):
        return (self.age(m[0], d), m[1])


class _PresentAfterMon(_Monitor):
    # (age of the first E2, satisfied, bad)
    def init(self):
        return (None, False, False)

    def tick(self, m, roles):
        armed, sat, bad = m
        if "e1" in roles and armed is not None and armed in self.p.interval:
            sat = True
        if "e2" in roles and armed is None:
            armed = Fraction(0)
        return (armed, sat, bad)

    def delay(self, m, d):
        armed, sat, bad = m
        armed = self.age(armed, d)
        return (armed, sat, bad or (armed is not None and not sat and _past(self.p.interval, armed)))


class _FirstBeforePresentMon(_Monitor):
    # (age of the first E1, E2 seen, bad)
    def init(self):
        return (None, False, False)

    def tick(self, m, roles):
        seen, done, bad = m
        if "e2" in roles and not done:
            done = True
            bad = bad or seen is None or seen not in self.p.interval
        if "e1" in roles and seen is None:
            seen = Fraction(0)
        return (seen, done, bad)

    def delay(self, m, d):
        return (self.age(m[0], d), m[1], m[2])


class _AbsentBeforeMon(_Monitor):
    # (age of the latest E1, E2 seen, bad)
    def init(self):
        return (None, False, False)

    def tick(self, m, roles):
        recent, done, bad = m
        if "e2" in roles and not done:
            done = True
            bad = bad or (recent is not None and recent < self.p.duration)
        if "e1" in roles:
            recent = Fraction(0)
        return (recent, done, bad)

    def delay(self, m, d):
        return (self.age(m[0], d), m[1], m[2])


class _LastingMon(_Monitor):
    # (age since E1 first held, bad); ticks are the truth value of E1
    def init(self):
        return (None, False)

    def tick(self, m, roles):
        start, bad = m
        holding = "e1" in roles
        if start is None:
            return (Fraction(0) if holding else None, bad)
        return (start, bad or (not holding and start < self.p.duration))

    def delay(self, m, d):
        return (self.age(m[0], d), m[1])


_MONITORS = {
    LeadsTo: _LeadsToMon, LeadsToFirstBefore: _FirstBeforeMon, LeadsToFirstAfter: _FirstAfterMon,
    AbsentAfter: _AbsentAfterMon, PresentAfter: _PresentAfterMon,
    PresentFirstBefore: _FirstBeforePresentMon, AbsentBeforeDur: _AbsentBeforeMon,
    PresentLasting: _LastingMon,
}


def _constants(p, net: Net) -> list:
    vals = [Fraction(0)]
    iv = getattr(p, "interval", None)
    if iv is not None:
        vals.append(iv.lo)
        if iv.hi is not None:
            vals.append(iv.hi)
    if hasattr(p, "duration"):
        vals.append(p.duration)
    for t in net.transitions:
        vals.append(t.interval.lo)
        if t.interval.hi is not None:
            vals.append(t.interval.hi)
    return vals


def monitor_for(p, net: Net, grid: Fraction):
    cap = max(_constants(p, net)) + grid
    return _MONITORS[type(p)](p, cap)


class _Feed:
    """Turns moves of the concrete semantics into monitor ticks."""

    def __init__(self, p, net, mon):
        self.p, self.net, self.mon = p, net, mon
        self.lasting = isinstance(p, PresentLasting)
        self.roles = None if self.lasting else _Roles(p, net)

    def state_tick(self, m, before, after):
        if self.lasting:
            return self.mon.tick(m, {"e1"} if holds_now(self.p.e1, self.net, after) else set())
        if self.roles.state_roles:
            r = self.roles.entry(before, after)
            if r:
                return self.mon.tick(m, r)
        return m

    def start(self, s0):
        return self.state_tick(self.mon.init(), None, s0)

    def event(self, m, name, before, after):
        if not self.lasting:
            r = self.roles.event(name)
            if r:
                m = self.mon.tick(m, r)
        return self.state_tick(m, before, after)

    def delay(self, m, d, state):
        if not self.lasting and self.roles.state_roles:
            r = self.roles.presence(state)
            if r:
                m = self.mon.tick(m, r)
        return self.mon.delay(m, d)


@dataclass
class OracleResult:
    holds: bool
    witness: Optional[TimedTrace] = None  # a violating trace when ``holds`` is false
    explored: int = 0
    sub: tuple = ()

    def __bool__(self):
        return self.holds


def _as_binding(p, target) -> Binding:
    return target if isinstance(target, Binding) else bind(p, target)


def bounded_verdict(p, target, grid=None, max_nodes: int = 2_000_000) -> OracleResult:
    """Decide ``p`` on the digitised state space of a net.

    Explores every reachable pair (concrete state, monitor state) with
    delays on the grid (half the gcd of the net's and the pattern's
    constants by default), without a depth bound.  Exact when the net's
    behaviour and the pattern's thresholds are captured by that grid,
    e.g. closed integer intervals in the net.
    """
    if isinstance(p, Implies):
        a = bounded_verdict(p.antecedent, target, grid, max_nodes)
        b = bounded_verdict(p.consequent, target, grid, max_nodes)
        return OracleResult((not a.holds) or b.holds, b.witness if a.holds else None,
                            a.explored + b.explored, (a, b))
    binding = _as_binding(p, target)
    p, net = binding.pattern, binding.net
    if grid is None:
        grid = _pattern_grid(p, net)
    grid = Fraction(grid)
    mon = monitor_for(p, net, grid)
    feed = _Feed(p, net, mon)
    s0 = initial_state(net)
    root = (s0, feed.start(s0))
    parent = {root: None}
    stack = [root]
    limit = mon.cap
    while stack:
        node = stack.pop()
        s, m = node
        if mon.bad(m):
            return OracleResult(False, _path(parent, node), len(parent))
        succ = []
        for t in sorted(fireables(s, net)):
            s2 = fire(s, t, net)
            succ.append(((s2, feed.event(m, t, s, s2)), t))
        k = 1
        while k * grid <= limit:
            d = k * grid
            if not all(iv.may_wait(d) for _, iv in s.dynamic):
                break
            succ.append(((elapse(s, d, net), feed.delay(m, d, s)), d))
            k += 1
        for child, item in succ:
            if child not in parent:
                parent[child] = (node, item)
                if len(parent) > max_nodes:
                    raise RuntimeError("bounded oracle: state space too large")
                stack.append(child)
    return OracleResult(True, None, len(parent))


def _path(parent, node) -> TimedTrace:
    items = []
    while parent[node] is not None:
        node, item = parent[node]
        items.append(item)
    return TimedTrace(reversed(items))


def _pattern_grid(p, net) -> Fraction:
    g = default_grid(net)
    from math import gcd
    vals = [v for v in _constants(p, net) if v]
    vals.append(g * 2)
    den = 1
    for v in vals:
        den = den * v.denominator // gcd(den, v.denominator)
    n = 0
    for v in vals:
        n = gcd(n, int(v * den))
    return Fraction(n, den) / 2


def enumerated_verdict(p, target, depth: int, horizon, grid=None, count_delays: bool = True) -> OracleResult:
    """Check ``p`` on every trace of a bounded exploration (depth and horizon)."""
    if isinstance(p, Implies):
        a = enumerated_verdict(p.antecedent, target, depth, horizon, grid, count_delays)
        b = enumerated_verdict(p.consequent, target, depth, horizon, grid, count_delays)
        return OracleResult((not a.holds) or b.holds, b.witness if a.holds else None,
                            a.explored + b.explored, (a, b))
    binding = _as_binding(p, target)
    grids = None if grid is None else [Fraction(grid)]
    n = 0
    for tr, _ in iter_bounded(binding.net, depth, grids, horizon, count_delays):
        n += 1
        if not oracle_eval(binding.pattern, tr, binding):
            return OracleResult(False, tr, n)
    return OracleResult(True, None, n)
