"""Concrete dense-time semantics: states, firing, time elapse and timed traces.

Times are exact rationals.  A state carries the marking, the store and
the dynamic firing interval of every enabled transition; firing and
elapsing produce new states (nothing is mutated).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Iterator, Optional

from .model import Net, Store, as_fraction

__all__ = [
    "ConcreteState", "TimedTrace", "SemanticsError", "NotFireable", "TimeBlocked",
    "TraceError", "initial_state", "fireables", "fire", "elapse", "run", "states_along",
    "duration", "composable", "compose_traces", "project", "explore_bounded",
    "iter_bounded", "default_grid", "is_delay",
]


class SemanticsError(ValueError):
    pass


class NotFireable(SemanticsError):
    def __init__(self, t: str):
        super().__init__(f"transition {t!r} is not fireable")
        self.transition = t


class TimeBlocked(SemanticsError):
    def __init__(self, d, t: str):
        super().__init__(f"time elapse of {d} blocked by {t}")
        self.delay = d
        self.transition = t


class TraceError(SemanticsError):
    def __init__(self, index: int, item, cause: Exception):
        super().__init__(f"item {index} ({_show_item(item)}) not applicable: {cause}")
        self.index = index
        self.item = item
        self.cause = cause


def is_delay(item) -> bool:
    return isinstance(item, Fraction)


def _show_item(item) -> str:
    if is_delay(item):
        return "@" + (str(item.numerator) if item.denominator == 1 else str(item))
    return str(item)


@dataclass(frozen=True)
class ConcreteState:
    marking: tuple
    store: Store
    dynamic: tuple  # ((transition name, TimeInterval), ...) in net order

    @property
    def intervals(self) -> dict:
        return dict(self.dynamic)

    def describe(self, net: Net) -> str:
        mark = ", ".join(f"{p}:{n}" for p, n in net.marking_dict(self.marking).items()) or "-"
        dyn = ", ".join(f"{t}{i}" for t, i in self.dynamic) or "-"
        return f"marking {{{mark}}} store {self.store!r} enabled {{{dyn}}}"


class TimedTrace:
    """Finite alternation of transition names and positive rational delays."""

    __slots__ = ("items",)

    def __init__(self, items: Iterable = ()):
        norm = []
        for it in items:
            if isinstance(it, str):
                norm.append(it)
            else:
                norm.append(as_fraction(it))
        self.items = tuple(norm)

    @classmethod
    def parse(cls, text: str) -> "TimedTrace":
        """One item per line: ``@d`` is a delay, anything else a transition."""
        items = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            items.append(as_fraction(line[1:].strip()) if line.startswith("@") else line)
        return cls(items)

    def dump(self) -> str:
        return "".join(_show_item(it) + "\n" for it in self.items)

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        r = self.items[i]
        return TimedTrace(r) if isinstance(i, slice) else r

    def __eq__(self, other):
        if isinstance(other, TimedTrace):
            return self.items == other.items
        if isinstance(other, (tuple, list)):
            return self == TimedTrace(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.items)

    def __add__(self, other):
        return TimedTrace(self.items + tuple(other))

    def __repr__(self):
        return "<" + ", ".join(_show_item(i) for i in self.items) + ">"

    @property
    def duration(self) -> Fraction:
        return duration(self)

    def events(self) -> list:
        return [i for i in self.items if not is_delay(i)]

    def merged(self) -> "TimedTrace":
        """Adjacent delays summed, zero delays dropped."""
        out: list = []
        for it in self.items:
            if is_delay(it):
                if it == 0:
                    continue
                if out and is_delay(out[-1]):
                    out[-1] += it
                    continue
            out.append(it)
        return TimedTrace(out)


def duration(sigma) -> Fraction:
    return sum((as_fraction(i) for i in sigma if not isinstance(i, str)), Fraction(0))


def initial_state(net: Net) -> ConcreteState:
    c = net.compiled
    m = net.initial_marking
    s = net.initial_store
    dyn = tuple((net.transitions[i].name, c.intervals[i]) for i in c.enabled_set(m, s.values))
    return ConcreteState(m, s, dyn)


def _fireable_indices(state: ConcreteState, net: Net) -> list:
    c = net.compiled
    idx = net.trans_index
    ready = {idx[t] for t, iv in state.dynamic if iv.contains(0)}
    return sorted(i for i in ready if not any(h in ready for h in c.dominators[i]))


def fireables(state: ConcreteState, net: Net) -> set:
    """Enabled transitions with 0 in their dynamic interval that no instantly
    fireable higher-priority transition blocks."""
    return {net.transitions[i].name for i in _fireable_indices(state, net)}


def fire(state: ConcreteState, t: str, net: Net) -> ConcreteState:
    c = net.compiled
    i = net.trans_index.get(t)
    if i is None or i not in _fireable_indices(state, net):
        raise NotFireable(t)
    idx = net.trans_index
    before = [idx[u] for u, _ in state.dynamic]
    m, s, _, persistent, fresh = c.fire_discrete(i, state.marking, state.store.values, before)
    old = {idx[u]: iv for u, iv in state.dynamic}
    dyn = {u: old[v] for u, v in persistent.items()}
    dyn.update((u, c.intervals[u]) for u in fresh)
    return ConcreteState(
        m, Store(net.schema, s), tuple((net.transitions[u].name, dyn[u]) for u in sorted(dyn))
    )


def elapse(state: ConcreteState, d, net: Net) -> ConcreteState:
    d = as_fraction(d)
    if d < 0:
        raise SemanticsError("negative delay")
    if d == 0:
        return state
    for t, iv in state.dynamic:
        if not iv.may_wait(d):
            raise TimeBlocked(d, t)
    return ConcreteState(state.marking, state.store, tuple((t, iv.shift(d)) for t, iv in state.dynamic))


def _step(state, item, net):
    return elapse(state, item, net) if is_delay(item) else fire(state, item, net)


def run(state: ConcreteState, sigma, net: Net) -> ConcreteState:
    """Replay ``sigma`` from ``state``; raise TraceError at the first bad item."""
    for k, item in enumerate(TimedTrace(sigma)):
        try:
            state = _step(state, item, net)
        except SemanticsError as e:
            raise TraceError(k, item, e) from e
    return state


def states_along(state: ConcreteState, sigma, net: Net) -> list:
    """All states visited by ``sigma`` (``len(sigma) + 1`` of them)."""
    out = [state]
    for k, item in enumerate(TimedTrace(sigma)):
        try:
            state = _step(state, item, net)
        except SemanticsError as e:
            raise TraceError(k, item, e) from e
        out.append(state)
    return out


# -- trace composition ------------------------------------------------------
# ``cmap`` is a CompositionMap (see compose.py): it knows both component nets
# and which composed transition comes from which component transitions.

def _skeleton(sigma, net: Net, shared: set):
    """Shared events with their time stamps, plus the total duration."""
    t = Fraction(0)
    out = []
    for it in sigma:
        if is_delay(it):
            t += it
        else:
            lab = net.transition(it).label
            if lab is not None and lab in shared:
                out.append((t, lab))
    return out, t


def composable(sigma1, sigma2, cmap) -> bool:
    """Shared (synchronising) events agree in order, label and time stamp and
    both traces last equally long."""
    shared = cmap.shared_labels
    try:
        a = _skeleton(sigma1, cmap.left, shared)
        b = _skeleton(sigma2, cmap.right, shared)
    except KeyError:
        return False
    return a == b


def compose_traces(sigma1, sigma2, cmap) -> TimedTrace:
    """Merge two composable traces into a trace of the composed net.

    Shared events with equal positions in the skeleton fuse into the fused
    transition; simultaneous private events are ordered left first.
    """
    if not composable(sigma1, sigma2, cmap):
        raise SemanticsError("traces are not composable")
    shared = cmap.shared_labels

    def timeline(sigma, net):
        t = Fraction(0)
        out = []
        for it in sigma:
            if is_delay(it):
                t += it
            else:
                lab = net.transition(it).label
                out.append((t, it, lab is not None and lab in shared))
        return out

    left, right = timeline(sigma1, cmap.left), timeline(sigma2, cmap.right)
    out: list = []
    now = Fraction(0)
    i = j = 0

    def emit(t, name):
        nonlocal now
        if t > now:
            out.append(t - now)
            now = t
        out.append(name)

    while i < len(left) or j < len(right):
        lt = left[i] if i < len(left) else None
        rt = right[j] if j < len(right) else None
        if lt and not lt[2] and (rt is None or lt[0] <= rt[0]):
            emit(lt[0], cmap.composed_name(lt[1], None))
            i += 1
        elif rt and not rt[2] and (lt is None or rt[0] < lt[0] or lt[2]):
            emit(rt[0], cmap.composed_name(None, rt[1]))
            j += 1
        else:
            # both at a shared event, same stamp by composability
            emit(lt[0], cmap.composed_name(lt[1], rt[1]))
            i += 1
            j += 1
    total = duration(sigma1)
    if total > now:
        out.append(total - now)
    return TimedTrace(out)


def project(sigma, side: str, cmap) -> TimedTrace:
    """Erase the other component's private transitions; keep delays."""
    out = []
    for it in sigma:
        if is_delay(it):
            out.append(it)
            continue
        l, r = cmap.origin[it]
        mine = l if side == "left" else r
        if mine is not None:
            out.append(mine)
    return TimedTrace(out).merged()


# -- bounded exploration (testing aid only) -----------------------------------

def default_grid(net: Net) -> Fraction:
    """Half the gcd of all finite interval endpoints (1/2 if there are none)."""
    vals = []
    for t in net.transitions:
        iv = t.interval
        vals.append(iv.lo)
        if iv.hi is not None:
            vals.append(iv.hi)
    vals = [v for v in vals if v]
    if not vals:
        return Fraction(1, 2)
    den = reduce(lambda a, b: a * b // gcd(a, b), (v.denominator for v in vals))
    g = reduce(gcd, (int(v * den) for v in vals))
    return Fraction(g, den) / 2


def _delay_options(state, grid, budget):
    steps = sorted(set(as_fraction(g) for g in grid))
    options = set()
    for g in steps:
        if g <= 0:
            raise ValueError("grid steps must be positive")
        k = 1
        while budget is None or k * g <= budget:
            d = k * g
            if not all(iv.may_wait(d) for _, iv in state.dynamic):
                break
            options.add(d)
            k += 1
            if budget is None and k > 64:
                break
    return sorted(options)


def iter_bounded(
    net: Net,
    max_steps: int,
    delay_grid: Optional[Iterable] = None,
    horizon=0,
    count_delays: bool = True,
) -> Iterator[tuple]:
    """Yield ``(trace, state)`` for every trace of the digitised exploration.

    Delays are positive multiples of a grid step, never two in a row;
    ``max_steps`` bounds the number of items (or of events only when
    ``count_delays`` is false) and the total duration stays within ``horizon``.
    """
    grid = [default_grid(net)] if delay_grid is None else list(delay_grid)
    horizon = as_fraction(horizon)

    def dfs(state, items, steps, elapsed, last_delay):
        yield TimedTrace(items), state
        if steps >= max_steps:
            return
        for t in sorted(fireables(state, net)):
            yield from dfs(fire(state, t, net), items + [t], steps + 1, elapsed, False)
        if not last_delay:
            for d in _delay_options(state, grid, horizon - elapsed):
                yield from dfs(
                    elapse(state, d, net), items + [d], steps + (1 if count_delays else 0), elapsed + d, True
                )

    yield from dfs(initial_state(net), [], 0, Fraction(0), False)


def explore_bounded(net: Net, max_steps: int, delay_grid=None, horizon=0, count_delays: bool = True) -> set:
    return {tr for tr, _ in iter_bounded(net, max_steps, delay_grid, horizon, count_delays)}
