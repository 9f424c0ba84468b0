"""Static structure of a Time Transition System.

A :class:`Net` is a time Petri net whose transitions may also test
(read arcs) or forbid (inhibitor arcs) tokens, guard on a bounded data
store, update the store, and be ordered by a priority relation.

Markings are tuples aligned with ``net.places``; stores are
:class:`Store` objects (immutable mappings laid out by the net's schema).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence, Union

from .expr import (
    TRUE, DomainError, Expr, ExprTypeError, compile_expr, evaluate, format_action, format_expr, infer_type, parse_action, parse_expr,
)

__all__ = [
    "TimeInterval", "UNBOUNDED", "VarDecl", "Store", "Transition", "Net",
    "Diagnostic", "NetError", "validate_net", "structurally_enabled",
    "eval_expr", "apply_action", "as_fraction", "DomainError",
]

Number = Union[int, Fraction, str]


def as_fraction(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("floating point times are not accepted; use Fraction or str")
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class TimeInterval:
    """A nonempty interval with nonnegative rational endpoints.

    ``hi=None`` stands for +inf and is always right-open.
    """

    lo: Fraction = Fraction(0)
    hi: Optional[Fraction] = None
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        lo = as_fraction(self.lo)
        object.__setattr__(self, "lo", lo)
        if self.hi is None:
            object.__setattr__(self, "hi_open", True)
        else:
            object.__setattr__(self, "hi", as_fraction(self.hi))
        if lo < 0:
            raise ValueError(f"negative lower bound in {self}")
        if self.hi is not None:
            if self.hi < lo or (self.hi == lo and (self.lo_open or self.hi_open)):
                raise ValueError(f"empty interval {self}")

    @classmethod
    def closed(cls, lo: Number, hi: Optional[Number]) -> "TimeInterval":
        return cls(as_fraction(lo), None if hi is None else as_fraction(hi))

    @classmethod
    def point(cls, x: Number) -> "TimeInterval":
        x = as_fraction(x)
        return cls(x, x)

    @classmethod
    def parse(cls, text: str) -> "TimeInterval":
        """Parse ``[a,b]``, ``]a,b[``, ``[a,inf[`` (``;`` also separates)."""
        s = text.strip()
        if len(s) < 5 or s[0] not in "[]" or s[-1] not in "[]":
            raise ValueError(f"malformed interval {text!r}")
        body = s[1:-1].replace(";", ",")
        parts = [p.strip() for p in body.split(",")]
        if len(parts) != 2:
            raise ValueError(f"malformed interval {text!r}")
        lo = as_fraction(parts[0])
        hi = None if parts[1] in ("inf", "oo", "+inf", "w") else as_fraction(parts[1])
        return cls(lo, hi, lo_open=s[0] == "]", hi_open=hi is None or s[-1] == "[")

    @property
    def bounded(self) -> bool:
        return self.hi is not None

    @property
    def is_point(self) -> bool:
        return self.hi is not None and self.hi == self.lo

    @property
    def is_trivial(self) -> bool:
        return self.lo == 0 and not self.lo_open and self.hi is None

    def contains(self, x) -> bool:
        x = as_fraction(x)
        if x < self.lo or (x == self.lo and self.lo_open):
            return False
        if self.hi is None:
            return True
        return x < self.hi or (x == self.hi and not self.hi_open)

    __contains__ = contains

    def may_wait(self, d) -> bool:
        """True if ``d`` time units may pass without passing the upper end."""
        if self.hi is None:
            return True
        return d < self.hi or (d == self.hi and not self.hi_open)

    def shift(self, d) -> "TimeInterval":
        """The interval seen after ``d`` time units: ``[max(0, lo-d), hi-d]``."""
        d = as_fraction(d)
        lo = self.lo - d
        lo_open = self.lo_open
        if lo < 0:
            lo, lo_open = Fraction(0), False
        hi = None if self.hi is None else self.hi - d
        return TimeInterval(lo, hi, lo_open, self.hi_open)

    def intersect(self, other: "TimeInterval") -> Optional["TimeInterval"]:
        if self.lo > other.lo or (self.lo == other.lo and self.lo_open):
            lo, lo_open = self.lo, self.lo_open
        else:
            lo, lo_open = other.lo, other.lo_open
        if self.hi is None:
            hi, hi_open = other.hi, other.hi_open
        elif other.hi is None or self.hi < other.hi or (self.hi == other.hi and self.hi_open):
            hi, hi_open = self.hi, self.hi_open
        else:
            hi, hi_open = other.hi, other.hi_open
        try:
            return TimeInterval(lo, hi, lo_open, hi_open)
        except ValueError:
            return None

    def __str__(self) -> str:
        hi = "inf" if self.hi is None else _fmt(self.hi)
        return f"{']' if self.lo_open else '['}{_fmt(self.lo)},{hi}{'[' if self.hi_open else ']'}"


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


UNBOUNDED = TimeInterval()


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: str = "bool"  # "bool" or "int"
    lo: int = 0
    hi: int = 0
    init: Union[bool, int, None] = None

    @property
    def initial(self):
        if self.init is not None:
            return self.init
        return False if self.type == "bool" else max(self.lo, min(0, self.hi))

    def admits(self, value) -> bool:
        if self.type == "bool":
            return isinstance(value, bool)
        return isinstance(value, int) and not isinstance(value, bool) and self.lo <= value <= self.hi

    def __str__(self) -> str:
        ty = "bool" if self.type == "bool" else f"int[{self.lo}..{self.hi}]"
        v = str(self.initial).lower() if self.type == "bool" else str(self.initial)
        return f"var {self.name} : {ty} = {v}"


class Store(Mapping):
    """Immutable valuation of a schema (hashable)."""

    __slots__ = ("schema", "values", "_index")

    def __init__(self, schema: Sequence[VarDecl], values: Sequence):
        self.schema = tuple(schema)
        self.values = tuple(values)
        self._index = {d.name: i for i, d in enumerate(self.schema)}

    @classmethod
    def initial(cls, schema: Sequence[VarDecl]) -> "Store":
        return cls(schema, [d.initial for d in schema])

    def __getitem__(self, name):
        return self.values[self._index[name]]

    def __iter__(self):
        return (d.name for d in self.schema)

    def __len__(self):
        return len(self.schema)

    def __hash__(self):
        return hash(self.values)

    def __eq__(self, other):
        if isinstance(other, Store):
            return self.values == other.values and [d.name for d in self.schema] == [d.name for d in other.schema]
        return Mapping.__eq__(self, other)

    def replace(self, **updates) -> "Store":
        vals = list(self.values)
        for k, v in updates.items():
            vals[self._index[k]] = v
        return Store(self.schema, vals)

    def __repr__(self):
        return "{" + ", ".join(f"{k}={_show(v)}" for k, v in self.items()) + "}"


def _show(v):
    return str(v).lower() if isinstance(v, bool) else str(v)


def _arcs(arcs) -> tuple:
    if arcs is None:
        return ()
    if isinstance(arcs, Mapping):
        arcs = arcs.items()
    out = {}
    for item in arcs:
        p, n = (item, 1) if isinstance(item, str) else item
        out[p] = out.get(p, 0) + n
    return tuple(sorted(out.items()))


@dataclass(frozen=True)
class Transition:
    """One transition.  Arc arguments accept dicts, pairs or bare place names."""

    name: str
    label: Optional[str] = None
    consume: tuple = ()
    produce: tuple = ()
    read: tuple = ()
    inhibit: tuple = ()
    interval: TimeInterval = UNBOUNDED
    pre: Expr = TRUE
    act: tuple = ()

    def __post_init__(self):
        for f in ("consume", "produce", "read", "inhibit"):
            object.__setattr__(self, f, _arcs(getattr(self, f)))
        if isinstance(self.interval, str):
            object.__setattr__(self, "interval", TimeInterval.parse(self.interval))
        if isinstance(self.pre, str):
            object.__setattr__(self, "pre", parse_expr(self.pre))
        if isinstance(self.act, str):
            object.__setattr__(self, "act", parse_action(self.act))
        else:
            object.__setattr__(self, "act", tuple(self.act))

    def places(self) -> set:
        return {p for arcs in (self.consume, self.produce, self.read, self.inhibit) for p, _ in arcs}

    def __str__(self):
        parts = [f"trans {self.name}"]
        if self.label is not None:
            parts.append(f"label {self.label}")
        for kw, arcs in (("in", self.consume), ("out", self.produce), ("read", self.read), ("inhib", self.inhibit)):
            if arcs:
                parts.append(kw + " " + " ".join(p if n == 1 else f"{p}*{n}" for p, n in arcs))
        if not self.interval.is_trivial:
            parts.append(f"interval {self.interval}")
        if self.pre != TRUE:
            parts.append(f'pre "{format_expr(self.pre)}"')
        if self.act:
            parts.append(f'act "{format_action(self.act)}"')
        return " ".join(parts)


@dataclass(frozen=True)
class Diagnostic:
    locus: str
    message: str

    def __str__(self):
        return f"{self.locus}: {self.message}"


class NetError(ValueError):
    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(map(str, self.diagnostics)) or "invalid net")


class Net:
    """A Time Transition System.

    ``places`` is a sequence of names or a mapping name -> initial tokens
    (``initial_marking`` may also be given separately).  ``priorities``
    holds pairs ``(hi, lo)``: transition ``hi`` has priority over ``lo``.
    ``shared`` names variables that are read from the net this one gets
    composed with rather than owned (see :mod:`ttsverify.compose`).
    ``clocks`` maps a transition name to ``(key, side)``: transitions with
    the same key are copies of one component transition ``side`` (arcs in
    this net's places) and hand its clock over to each other while
    ``side`` itself stays enabled.
    """

    def __init__(
        self,
        places: Union[Sequence[str], Mapping[str, int]] = (),
        transitions: Iterable[Transition] = (),
        initial_marking: Optional[Mapping[str, int]] = None,
        variables: Iterable[VarDecl] = (),
        priorities: Iterable[tuple] = (),
        name: str = "net",
        shared: Iterable[str] = (),
        clocks: Optional[Mapping[str, tuple]] = None,
    ):
        if isinstance(places, Mapping):
            marking = dict(places)
            places = list(places)
        else:
            marking = {}
        if initial_marking:
            marking.update(initial_marking)
        self.name = name
        self.places: tuple = tuple(places)
        self.transitions: tuple = tuple(transitions)
        self.initial_marking_map: dict = {p: n for p, n in marking.items() if n}
        self.schema: tuple = tuple(variables)
        self.priorities: frozenset = frozenset(tuple(p) for p in priorities)
        self.shared: frozenset = frozenset(shared)
        self.clocks: dict = dict(clocks or {})

    # -- lookup ---------------------------------------------------------
    @cached_property
    def place_index(self) -> dict:
        return {p: i for i, p in enumerate(self.places)}

    @cached_property
    def trans_index(self) -> dict:
        return {t.name: i for i, t in enumerate(self.transitions)}

    def transition(self, name: str) -> Transition:
        return self.transitions[self.trans_index[name]]

    @property
    def initial_marking(self) -> tuple:
        return tuple(self.initial_marking_map.get(p, 0) for p in self.places)

    @property
    def initial_store(self) -> Store:
        return Store.initial(self.schema)

    def marking(self, m: Union[Mapping[str, int], Sequence[int]]) -> tuple:
        if isinstance(m, Mapping):
            return tuple(m.get(p, 0) for p in self.places)
        return tuple(m)

    def marking_dict(self, m: Sequence[int]) -> dict:
        return {p: n for p, n in zip(self.places, m) if n}

    def labels(self) -> set:
        return {t.label for t in self.transitions if t.label is not None}

    def dominators(self, name: str) -> list:
        return sorted(h for h, lo in self.priorities if lo == name)

    def __repr__(self):
        return f"<Net {self.name}: {len(self.places)} places, {len(self.transitions)} transitions>"

    # -- compiled form used by the semantics and the state-class engine --
    @cached_property
    def compiled(self) -> "CompiledNet":
        diags = validate_net(self)
        if diags:
            raise NetError(diags)
        return CompiledNet(self)


class CompiledNet:
    """Index-based view of a valid net; everything the hot loops touch."""

    def __init__(self, net: Net):
        pi = net.place_index
        var_index = {d.name: i for i, d in enumerate(net.schema)}
        self.net = net
        self.n = len(net.transitions)
        self.schema = net.schema
        self.consume = [tuple((pi[p], k) for p, k in t.consume) for t in net.transitions]
        self.produce = [tuple((pi[p], k) for p, k in t.produce) for t in net.transitions]
        self.read = [tuple((pi[p], k) for p, k in t.read) for t in net.transitions]
        self.inhibit = [tuple((pi[p], k) for p, k in t.inhibit) for t in net.transitions]
        # marking test: need = max(consume, read) per place
        self.need = []
        for c, r in zip(self.consume, self.read):
            need: dict = {}
            for p, k in c + r:
                need[p] = max(need.get(p, 0), k)
            self.need.append(tuple(need.items()))
        self.pre = [None if t.pre == TRUE else compile_expr(t.pre, var_index) for t in net.transitions]
        self.act = [
            tuple((var_index[v], compile_expr(e, var_index)) for v, e in t.act) for t in net.transitions
        ]
        self.intervals = [t.interval for t in net.transitions]
        ti = net.trans_index
        self.dominators = [[] for _ in net.transitions]
        for h, lo in net.priorities:
            self.dominators[ti[lo]].append(ti[h])
        # clock sharing between copies of one component transition
        self.clock_key = [None] * self.n
        self.side_ok = [None] * self.n
        self.clock_mates: dict = {}
        for name, (key, side) in net.clocks.items():
            i = ti[name]
            self.clock_key[i] = key
            self.clock_mates.setdefault(key, []).append(i)
            need: dict = {}
            for p, k in tuple(side.consume) + tuple(side.read):
                need[pi[p]] = max(need.get(pi[p], 0), k)
            self.side_ok[i] = (tuple(need.items()), tuple((pi[p], k) for p, k in side.inhibit))

    def marking_ok(self, i: int, m: Sequence[int]) -> bool:
        for p, k in self.need[i]:
            if m[p] < k:
                return False
        for p, k in self.inhibit[i]:
            if m[p] >= k:
                return False
        return True

    def enabled(self, i: int, m: Sequence[int], s: Sequence) -> bool:
        if not self.marking_ok(i, m):
            return False
        pre = self.pre[i]
        return pre is None or bool(pre(s))

    def enabled_set(self, m, s) -> tuple:
        return tuple(i for i in range(self.n) if self.enabled(i, m, s))

    def apply(self, i: int, s: tuple) -> tuple:
        act = self.act[i]
        if not act:
            return s
        vals = list(s)
        for vi, f in act:
            v = f(vals)
            d = self.schema[vi]
            if d.type == "int" and not (d.lo <= v <= d.hi):
                raise DomainError(
                    f"{self.net.transitions[i].name}: {d.name} := {v} leaves [{d.lo}..{d.hi}]"
                )
            vals[vi] = v
        return tuple(vals)

    def _side_holds(self, u: int, m) -> bool:
        need, inhib = self.side_ok[u]
        return all(m[p] >= k for p, k in need) and all(m[p] < k for p, k in inhib)

    def fire_discrete(self, i: int, m: tuple, s: tuple, enabled_before: Sequence[int]):
        """Marking, store and the persistent/newly-enabled split after firing ``i``.

        A transition other than ``i`` persists when it was enabled before,
        its arcs are still satisfied by the intermediate marking (consume of
        ``i`` removed), and it is enabled after.  ``i`` itself is always
        newly enabled if it is enabled after.

        ``persistent`` maps each persistent transition to the transition
        whose clock it keeps: itself, or an enabled copy of the same
        component transition (see ``Net.clocks``) when that component
        transition was not the one fired and its own arcs still hold in
        the intermediate marking.
        """
        mid = list(m)
        for p, k in self.consume[i]:
            mid[p] -= k
        new_m = list(mid)
        for p, k in self.produce[i]:
            new_m[p] += k
        new_m = tuple(new_m)
        new_s = self.apply(i, s)
        after = self.enabled_set(new_m, new_s)
        before = set(enabled_before)
        persistent, fresh = {}, []
        keys = self.clock_key
        for u in after:
            if u != i and u in before and self.marking_ok(u, mid):
                persistent[u] = u
                continue
            k = keys[u]
            if k is not None and k != keys[i] and self._side_holds(u, mid):
                src = next((v for v in self.clock_mates[k] if v in before), None)
                if src is not None:
                    persistent[u] = src
                    continue
            fresh.append(u)
        return new_m, new_s, after, persistent, fresh


def _priority_cycle(pairs) -> Optional[list]:
    succ: dict = {}
    for h, lo in pairs:
        succ.setdefault(h, []).append(lo)
    colour: dict = {}
    stack_path: list = []

    def visit(n):
        colour[n] = 1
        stack_path.append(n)
        for m in succ.get(n, ()):
            if colour.get(m) == 1:
                return stack_path[stack_path.index(m):] + [m]
            if m not in colour:
                found = visit(m)
                if found:
                    return found
        colour[n] = 2
        stack_path.pop()
        return None

    for n in sorted(succ):
        if n not in colour:
            found = visit(n)
            if found:
                return found
    return None


def validate_net(net: Net) -> list:
    """Check every structural invariant; one :class:`Diagnostic` per violation."""
    diags = []
    seen = set()
    for p in net.places:
        if p in seen:
            diags.append(Diagnostic(f"place {p}", "duplicate place"))
        seen.add(p)
    places = set(net.places)
    for p, n in net.initial_marking_map.items():
        if p not in places:
            diags.append(Diagnostic(f"place {p}", "initial marking on undeclared place"))
        elif not isinstance(n, int) or n < 0:
            diags.append(Diagnostic(f"place {p}", f"initial marking {n!r} is not a natural number"))

    types = {}
    for d in net.schema:
        loc = f"var {d.name}"
        if d.name in types:
            diags.append(Diagnostic(loc, "duplicate variable"))
        if d.type not in ("bool", "int"):
            diags.append(Diagnostic(loc, f"unknown type {d.type!r}"))
            continue
        if d.type == "int" and d.lo > d.hi:
            diags.append(Diagnostic(loc, f"empty bounds [{d.lo}..{d.hi}]"))
        elif not d.admits(d.initial):
            diags.append(Diagnostic(loc, f"initial value {d.initial!r} outside its type"))
        types[d.name] = d.type

    tnames = set()
    for t in net.transitions:
        loc = f"transition {t.name}"
        if t.name in tnames:
            diags.append(Diagnostic(loc, "duplicate transition"))
        tnames.add(t.name)
        for kind, arcs in (("consume", t.consume), ("produce", t.produce), ("read", t.read), ("inhibit", t.inhibit)):
            for p, k in arcs:
                if p not in places:
                    diags.append(Diagnostic(loc, f"{kind} arc on undeclared place {p!r}"))
                if not isinstance(k, int) or k < 1:
                    diags.append(Diagnostic(loc, f"{kind} arc on {p!r} has multiplicity {k!r}"))
        try:
            if infer_type(t.pre, types) != "bool":
                diags.append(Diagnostic(loc, "guard is not boolean"))
        except ExprTypeError as e:
            diags.append(Diagnostic(loc, f"guard: {e}"))
        for v, e in t.act:
            if v not in types:
                diags.append(Diagnostic(loc, f"assignment to undeclared variable {v!r}"))
                continue
            if v in net.shared:
                diags.append(Diagnostic(loc, f"assignment to shared variable {v!r}"))
            try:
                ty = infer_type(e, types)
            except ExprTypeError as err:
                diags.append(Diagnostic(loc, f"action: {err}"))
                continue
            if ty != types[v]:
                diags.append(Diagnostic(loc, f"assigning {ty} to {types[v]} variable {v!r}"))

    for h, lo in sorted(net.priorities):
        if h not in tnames or lo not in tnames:
            missing = h if h not in tnames else lo
            diags.append(Diagnostic(f"prio {h} > {lo}", f"unknown transition {missing!r}"))
        if h == lo:
            diags.append(Diagnostic(f"prio {h} > {lo}", "reflexive priority"))
    cycle = _priority_cycle([(h, lo) for h, lo in net.priorities if h != lo])
    if cycle:
        diags.append(Diagnostic("prio " + " > ".join(cycle), "cyclic priority"))
    return diags


def structurally_enabled(net: Net, marking, store, t) -> bool:
    """Tokens cover consume and read arcs, inhibitor places stay below
    their threshold, and the guard holds."""
    c = net.compiled
    m = net.marking(marking)
    i = net.trans_index[t if isinstance(t, str) else t.name]
    s = store.values if isinstance(store, Store) else Store(net.schema, [store[d.name] for d in net.schema]).values
    return c.enabled(i, m, s)


def eval_expr(store: Mapping, e: Union[Expr, str]):
    if isinstance(e, str):
        e = parse_expr(e)
    return evaluate(e, store)


def apply_action(store: Store, a) -> Store:
    """Run the assignments left to right; raise DomainError on a bound violation."""
    if isinstance(a, str):
        a = parse_action(a)
    if not a:
        return store
    env = dict(store)
    decls = {d.name: d for d in store.schema}
    for v, e in a:
        val = evaluate(e, env)
        d = decls[v]
        if not d.admits(val):
            raise DomainError(f"{v} := {val} leaves the domain of {d}")
        env[v] = val
    return Store(store.schema, [env[d.name] for d in store.schema])
