"""Observer nets for patterns.

An observer is a TTS composed with the system; it fires a transition
labelled :data:`ERROR_LABEL` exactly when the observed behaviour violates
the pattern, so checking the pattern amounts to checking that no error
transition is reachable in the product.

Three kinds of observers are built:

* ``transition``: places only.  One copy of each watched label per
  relevant observer state (``obs`` empty / full ...).
* ``data``: no places.  One synchronised transition per watched label
  with guard ``true`` and an action on observer variables; timing is
  done by internal transitions guarded on those variables.  Fused system
  transitions keep their arcs, guards and intervals, so the system's
  clocks are never disturbed.
* ``place``: probe transitions reading system places through place
  fusion (leadsto on state events).

Internal clocks that must restart while they stay enabled use two twin
transitions selected by a phase bit that is flipped on each restart:
flipping the bit disables one twin and newly enables the other.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from ..expr import format_expr
from ..model import Net, Transition, TimeInterval, VarDecl
from .ast import (
    AbsentAfter, AbsentBeforeDur, Implies, LabelSet, LeadsTo, LeadsToFirstAfter, LeadsToFirstBefore,
    PlaceEntry, PlaceExit, PresentAfter, PresentFirstBefore, PresentLasting, StorePredicate,
    is_state_event,
)
from .binding import Binding, bind

__all__ = [
    "ERROR_LABEL", "PREFIX", "Observer", "ObserverMeta", "SyncSpec", "UnsupportedPattern",
    "build_observer", "supported_variants", "VARIANTS",
]

PREFIX = "__obs."
ERROR_LABEL = PREFIX + "error"
VARIANTS = ("transition", "data", "place")


class UnsupportedPattern(ValueError):
    pass


@dataclass(frozen=True)
class SyncSpec:
    labels: frozenset = frozenset()
    place_pairs: tuple = ()  # (system place, observer probe place)


@dataclass(frozen=True)
class ObserverMeta:
    t_sync: frozenset
    l_sync: frozenset
    t_imm: frozenset

    @classmethod
    def of(cls, net: Net, sync_labels) -> "ObserverMeta":
        sync_labels = frozenset(sync_labels)
        ts = frozenset(t.name for t in net.transitions if t.label is not None and t.label in sync_labels)
        imm = frozenset(t.name for t in net.transitions if t.interval == TimeInterval.point(0))
        return cls(ts, frozenset(t.label for t in net.transitions if t.name in ts), imm)


@dataclass
class Observer:
    net: Net
    error_label: str
    sync: SyncSpec
    meta: ObserverMeta
    variant: str
    pattern: object = None

    def __iter__(self):  # (net, error_label, sync_spec)
        return iter((self.net, self.error_label, self.sync))


# -- builder -------------------------------------------------------------------

P0 = TimeInterval.point(0)


def _point(x):
    return TimeInterval.point(x)


def _after(x, strict):
    """``]x,inf[`` when strict, ``[x,inf[`` otherwise."""
    return TimeInterval(Fraction(x), None, lo_open=strict)


class _B:
    def __init__(self, name):
        self.name = name
        self.places: dict = {}
        self.trans: list = []
        self.vars: list = []
        self.shared: list = []
        self.prios: set = set()
        self.pairs: list = []

    def v(self, name, init=False):
        full = PREFIX + name
        if full not in {d.name for d in self.vars}:
            self.vars.append(VarDecl(full, "bool", init=init))
        return full

    def p(self, name, init=0):
        full = PREFIX + name
        self.places.setdefault(full, init)
        return full

    def probe(self, system_place):
        full = self.p("probe." + system_place)
        if (system_place, full) not in self.pairs:
            self.pairs.append((system_place, full))
        return full

    def t(self, name, label=None, **kw):
        full = PREFIX + name
        self.trans.append(Transition(full, label, **kw))
        return full

    def prio(self, hi, los):
        for lo in los:
            self.prios.add((hi, lo))

    def net(self):
        return Net(
            dict(self.places), self.trans, None, list(self.vars) + list(self.shared), self.prios,
            name=self.name, shared=[d.name for d in self.shared],
        )


def _labels(e) -> list:
    return sorted(e.labels) if isinstance(e, LabelSet) else []


def _sync_all(b: _B, events: dict, effects: dict, order: list) -> dict:
    """One always-enabled transition per watched label running the effects of
    its roles in ``order``.  Returns role -> names of transitions playing it."""
    per_label: dict = {}
    for role in order:
        for lab in _labels(events.get(role)):
            per_label.setdefault(lab, []).append(role)
    playing: dict = {r: [] for r in order}
    for lab in sorted(per_label):
        roles = per_label[lab]
        act = "; ".join(a for r in roles for a in effects.get(r, ()) if a)
        name = b.t("sync." + lab, lab, act=act)
        for r in roles:
            playing[r].append(name)
    return playing


def _error(b: _B, name="error", **kw):
    return b.t(name, ERROR_LABEL, **kw)


def _lo0(iv: TimeInterval) -> bool:
    return iv.lo == 0 and not iv.lo_open


def _twins(b: _B, base: str, guard: str, phase: str, **kw) -> list:
    """Two copies of a timed transition selected by ``phase``."""
    a = b.t(base + ".a", pre=f"{guard} && {phase}", **kw)
    c = b.t(base + ".b", pre=f"{guard} && !{phase}", **kw)
    return [a, c]


def _late(b: _B, iv: TimeInterval, guard: str, name: str, act: str, twin_phase=None, label=ERROR_LABEL):
    """Transition firing once ``guard`` has held for longer than ``iv`` allows.

    Right-open bound: urgent at ``hi``; the caller gives it priority over
    the answering events.  Right-closed bound: may fire any time after ``hi``.
    """
    if iv.hi is None:
        return []
    interval = _point(iv.hi) if iv.hi_open else _after(iv.hi, True)
    if twin_phase:
        return [
            b.t(name + ".a", label, pre=f"{guard} && {twin_phase}", interval=interval, act=act),
            b.t(name + ".b", label, pre=f"{guard} && !{twin_phase}", interval=interval, act=act),
        ]
    return [b.t(name, label, pre=guard, interval=interval, act=act)]


def _bad_error(b: _B, bad: str):
    return _error(b, "error.bad", pre=bad, interval=P0, act=f"{bad} := false")


# -- leadsto family (data) ------------------------------------------------------

def _leadsto_core(b: _B, p, scoped: Optional[str]):
    """Shared machinery of the three leadsto patterns on label events.

    ``scoped`` is None (plain), "before" or "after".  Returns the effects
    per role and the names of the deadline transitions.
    """
    iv = p.interval
    l1, l2 = set(_labels(p.e1)), set(_labels(p.e2))
    pend = b.v("pend")
    need_early = not _lo0(iv)
    overlap = bool(l1 & l2)
    eff = {"e1": [], "e2": [], "e3": []}
    viol = b.v("viol") if scoped == "before" else None
    bad = b.v("bad") if need_early or scoped == "before" else None
    gate = None
    if scoped == "after":
        gate = b.v("act3")
    # E2: check the newest E1 was not too recent, restart the deadline twin, clear
    if need_early:
        early = b.v("early")
        target = viol or bad
        eff["e2"].append(f"{target} := {target} || {early}")
        eff["e2"].append(f"{early} := false")
    ph2 = b.v("ph2") if overlap and iv.hi is not None else None
    if ph2:
        eff["e2"].append(f"{ph2} := {ph2} != {pend}")
    eff["e2"].append(f"{pend} := false")
    # E1: arm the deadline if idle, restart the early window
    if gate:
        eff["e1"].append(f"{pend} := {pend} || {gate}")
    else:
        eff["e1"].append(f"{pend} := true")
    timed = []
    if need_early:
        ph = b.v("ph")
        if gate:
            eff["e1"] += [f"{early} := {early} || {gate}", f"{ph} := {ph} != {gate}"]
        else:
            eff["e1"] += [f"{early} := true", f"{ph} := !{ph}"]
        opens = _twins(b, "open", early, ph, interval=_point(iv.lo), act=f"{early} := false")
        if not iv.lo_open:
            timed.append(("e2", opens))
    if scoped == "before":
        late = _late(b, iv, pend, "late", f"{viol} := true; {pend} := false", ph2, label=None)
    else:
        late = _late(b, iv, pend, "error.late", f"{pend} := false", ph2)
    if late and iv.hi_open:
        timed.append(("e2", late))
    if scoped == "before":
        done = b.v("done")
        eff["e3"].append(f"{bad} := {bad} || (!{done} && ({viol} || {pend}))")
        eff["e3"].append(f"{done} := true")
    elif scoped == "after":
        eff["e3"].append(f"{gate} := true")
    if bad:
        _bad_error(b, bad)
    return eff, timed


def _data_leadsto(b, p, events):
    scoped = {LeadsTo: None, LeadsToFirstBefore: "before", LeadsToFirstAfter: "after"}[type(p)]
    eff, timed = _leadsto_core(b, p, scoped)
    order = {None: ["e2", "e1"], "before": ["e3", "e2", "e1"], "after": ["e2", "e1", "e3"]}[scoped]
    playing = _sync_all(b, events, eff, order)
    for role, names in timed:
        for hi in names:
            b.prio(hi, playing[role])


def _data_absent_after(b, p, events):
    iv = p.interval
    armed, inwin, closed, bad = b.v("armed"), b.v("inwin"), b.v("closed"), b.v("bad")
    eff = {"e2": [f"{bad} := {bad} || {inwin}"], "e1": []}
    if _lo0(iv):
        eff["e1"].append(f"{inwin} := {inwin} || !{armed}")
    eff["e1"].append(f"{armed} := true")
    playing = _sync_all(b, events, eff, ["e2", "e1"])
    if not _lo0(iv):
        opened = b.v("opened")
        interval = _after(iv.lo, True) if iv.lo_open else _point(iv.lo)
        o = b.t("open", pre=f"{armed} && !{opened} && !{closed}", interval=interval,
                act=f"{inwin} := true; {opened} := true")
        if not iv.lo_open:
            b.prio(o, playing["e2"])
    if iv.hi is not None:
        c = b.t("close", pre=f"{armed} && !{closed}", interval=_point(iv.hi),
                act=f"{inwin} := false; {closed} := true")
        if iv.hi_open:
            b.prio(c, playing["e2"])
    _bad_error(b, bad)


def _data_present_after(b, p, events):
    iv = p.interval
    armed, inwin, sat = b.v("armed"), b.v("inwin"), b.v("sat")
    eff = {"e1": [f"{sat} := {sat} || {inwin}"], "e2": []}
    if _lo0(iv):
        eff["e2"].append(f"{inwin} := {inwin} || !{armed}")
    eff["e2"].append(f"{armed} := true")
    playing = _sync_all(b, events, eff, ["e1", "e2"])
    if not _lo0(iv):
        opened = b.v("opened")
        o = b.t("open", pre=f"{armed} && !{opened}", interval=_point(iv.lo),
                act=f"{inwin} := true; {opened} := true")
        if not iv.lo_open:
            b.prio(o, playing["e1"])
    if iv.hi is not None:
        _error(b, "error.late", pre=f"{armed} && !{sat}", interval=_after(iv.hi, not iv.hi_open),
               act=f"{sat} := true")


def _data_present_first_before(b, p, events):
    iv = p.interval
    seen, young, old, done, bad = b.v("seen"), b.v("young"), b.v("old"), b.v("done"), b.v("bad")
    eff = {
        "e2": [f"{bad} := {bad} || (!{done} && (!{seen} || {young} || {old}))", f"{done} := true"],
        "e1": [],
    }
    if not _lo0(iv):
        eff["e1"].append(f"{young} := {young} || !{seen}")
    eff["e1"].append(f"{seen} := true")
    playing = _sync_all(b, events, eff, ["e2", "e1"])
    if not _lo0(iv):
        y = b.t("young.end", pre=young, interval=_point(iv.lo), act=f"{young} := false")
        if not iv.lo_open:
            b.prio(y, playing["e2"])
    if iv.hi is not None:
        b.t("old", pre=f"{seen} && !{old}", interval=_after(iv.hi, not iv.hi_open), act=f"{old} := true")
    _bad_error(b, bad)


def _data_absent_before(b, p, events):
    d = p.duration
    recent, ph, done, bad = b.v("recent"), b.v("ph"), b.v("done"), b.v("bad")
    eff = {
        "e2": [f"{bad} := {bad} || (!{done} && {recent})", f"{done} := true"],
        "e1": [f"{recent} := true", f"{ph} := !{ph}"] if d > 0 else [],
    }
    playing = _sync_all(b, events, eff, ["e2", "e1"])
    if d > 0:
        for x in _twins(b, "expire", recent, ph, interval=_point(d), act=f"{recent} := false"):
            b.prio(x, playing["e2"])
    _bad_error(b, bad)


# -- state events ---------------------------------------------------------------

def _state_guard(b: _B, e, system: Net, positive=True):
    """Arcs and guard testing a state event (or its negation)."""
    kw: dict = {}
    guard = None
    if isinstance(e, (PlaceEntry, PlaceExit)):
        probe = b.probe(e.place)
        marked = isinstance(e, PlaceEntry) == positive
        kw["read" if marked else "inhibit"] = [probe]
    elif isinstance(e, StorePredicate):
        for d in system.schema:
            if d.name not in {x.name for x in b.shared} and d.name in _vars_of(e):
                b.shared.append(d)
        text = format_expr(e.expr)
        guard = f"({text})" if positive else f"!({text})"
    return kw, guard


def _vars_of(e):
    from ..expr import expr_vars
    return expr_vars(e.expr)


def _and(*parts):
    parts = [x for x in parts if x]
    return " && ".join(parts) if parts else "true"


def _data_leadsto_states(b, p, system):
    iv = p.interval
    pend = b.v("pend")
    kw1, g1 = _state_guard(b, p.e1, system)
    kw2, g2 = _state_guard(b, p.e2, system)
    b.t("tau1", PREFIX + "tau1", pre=_and(g1, f"!{pend}"), interval=P0, act=f"{pend} := true", **kw1)
    t2 = b.t("tau2", PREFIX + "tau2", pre=_and(g2, pend), interval=P0, act=f"{pend} := false", **kw2)
    for e in _late(b, iv, pend, "error", f"{pend} := false"):
        if iv.hi_open:
            b.prio(e, [t2])


def _place_leadsto(b, p, system):
    iv = p.interval
    obs = b.p("obs")
    kw1, _ = _state_guard(b, p.e1, system)
    kw2, _ = _state_guard(b, p.e2, system)
    kw1.setdefault("inhibit", [])
    kw1["inhibit"] = list(kw1["inhibit"]) + [obs]
    b.t("tau1", PREFIX + "tau1", produce=[obs], interval=P0, **kw1)
    t2 = b.t("tau2", PREFIX + "tau2", consume=[obs], interval=P0, **kw2)
    if iv.hi is not None:
        interval = _point(iv.hi) if iv.hi_open else _after(iv.hi, True)
        e = _error(b, consume=[obs], interval=interval)
        if iv.hi_open:
            b.prio(e, [t2])


def _data_lasting(b, p, system):
    started, fin = b.v("started"), b.v("fin")
    kwp, gp = _state_guard(b, p.e1, system, True)
    kwn, gn = _state_guard(b, p.e1, system, False)
    b.t("start", pre=_and(gp, f"!{started}"), interval=P0, act=f"{started} := true", **kwp)
    f = b.t("fin", pre=f"{started} && !{fin}", interval=_point(p.duration), act=f"{fin} := true")
    e = _error(b, pre=_and(gn, started, f"!{fin}"), interval=P0, act=f"{fin} := true", **kwn)
    b.prio(f, [e])


# -- transition observers (places only) -----------------------------------------

def _merge(*kws):
    out: dict = {}
    for kw in kws:
        for k, arcs in kw.items():
            cur = dict(out.get(k, {}))
            for pl in arcs:
                pl, n = (pl, 1) if isinstance(pl, str) else pl
                cur[pl] = cur.get(pl, 0) + n if k in ("consume", "produce") else max(cur.get(pl, 0), n)
            out[k] = cur
    return out


def _copies(b: _B, l1, l2, c1: dict, c2: dict, prio_on2=()):
    """One transition per watched label and per pair of role copies.

    ``c1``/``c2`` map copy name -> arcs for the E1 / E2 roles.  A label in
    both sets gets the product of the copies (E2 side tested first)."""
    names2 = []
    for lab in sorted(set(l1) | set(l2)):
        opts1 = c1.items() if lab in l1 else [("", {})]
        opts2 = c2.items() if lab in l2 else [("", {})]
        for n2, a2 in opts2:
            for n1, a1 in opts1:
                tag = ".".join(x for x in (n2, n1) if x)
                name = b.t(f"{tag}.{lab}", lab, **_merge(a2, a1))
                if lab in l2 and n2 in prio_on2:
                    names2.append(name)
    return names2


def _transition_leadsto(b, p, deterministic):
    iv = p.interval
    obs = b.p("obs")
    l1, l2 = _labels(p.e1), _labels(p.e2)
    c1 = {"fill": {"inhibit": [obs], "produce": [obs]}}
    c2 = {"drain": {"consume": [obs]}}
    if deterministic:
        c1["keep"] = {"read": [obs]}
        c2["noop"] = {"inhibit": [obs]}
    overlap = set(l1) & set(l2)
    drains = []
    for lab in sorted(set(l1) | set(l2)):
        if lab in overlap:
            # E2 then E1 on one event: obs ends up full either way
            b.t(f"fill.{lab}", lab, inhibit=[obs], produce=[obs])
            drains.append(b.t(f"refill.{lab}", lab, consume=[obs], produce=[obs]))
        elif lab in l1:
            for n, arcs in c1.items():
                b.t(f"{n}.{lab}", lab, **arcs)
        else:
            for n, arcs in c2.items():
                name = b.t(f"{n}.{lab}", lab, **arcs)
                if n == "drain":
                    drains.append(name)
    if iv.hi is not None:
        interval = _point(iv.hi) if iv.hi_open else _after(iv.hi, True)
        e = _error(b, consume=[obs], interval=interval)
        if iv.hi_open:
            b.prio(e, drains)


def _transition_absent_after(b, p):
    iv = p.interval
    idle = b.p("idle", 1)
    win, over, bad = b.p("win"), b.p("over"), b.p("bad")
    l1, l2 = _labels(p.e1), _labels(p.e2)
    first = {"produce": [win] if _lo0(iv) else [b.p("pre")], "consume": [idle]}
    if iv.hi is not None:
        first["produce"] = list(first["produce"]) + [b.p("armed")]
    c1 = {"first": first, "again": {"inhibit": [idle]}}
    c2 = {
        "hit": {"read": [win], "inhibit": [over, bad], "produce": [bad]},
        "out": {"inhibit": [win]},
        "late": {"read": [over]},
        "dup": {"read": [bad]},
    }
    e2_all = _copies(b, l1, l2, c1, c2, prio_on2=set(c2))
    if not _lo0(iv):
        interval = _after(iv.lo, True) if iv.lo_open else _point(iv.lo)
        o = b.t("open", consume=[PREFIX + "pre"], produce=[win], inhibit=[over], interval=interval)
        if not iv.lo_open:
            b.prio(o, e2_all)
    if iv.hi is not None:
        c = b.t("close", consume=[PREFIX + "armed"], produce=[over], interval=_point(iv.hi))
        if iv.hi_open:
            b.prio(c, e2_all)
    _error(b, consume=[bad], interval=P0)


# -- factory --------------------------------------------------------------------

_DATA_LABEL = {
    LeadsTo: _data_leadsto, LeadsToFirstBefore: _data_leadsto, LeadsToFirstAfter: _data_leadsto,
    AbsentAfter: _data_absent_after, PresentAfter: _data_present_after,
    PresentFirstBefore: _data_present_first_before, AbsentBeforeDur: _data_absent_before,
}


def supported_variants(p) -> tuple:
    """Variants :func:`build_observer` accepts for ``p`` (after binding)."""
    out = []
    for v in VARIANTS:
        try:
            _check(p, v, True)
            out.append(v)
        except UnsupportedPattern:
            pass
    return tuple(out)


def _check(p, variant, deterministic):
    if isinstance(p, Implies):
        raise UnsupportedPattern("an implication is checked as two patterns; build one observer per side")
    if variant not in VARIANTS:
        raise UnsupportedPattern(f"unknown observer variant {variant!r}")
    kind = type(p).__name__
    if not deterministic and not (isinstance(p, LeadsTo) and variant == "transition"):
        raise UnsupportedPattern(f"no nondeterministic {variant} observer for {kind}")
    events = [getattr(p, f) for f in ("e1", "e2", "e3") if hasattr(p, f)]
    states = [is_state_event(e) for e in events]
    if isinstance(p, PresentLasting):
        if variant != "data":
            raise UnsupportedPattern(f"no {variant} observer for {kind} (data only)")
        return
    if isinstance(p, LeadsTo) and any(states):
        if not all(states):
            raise UnsupportedPattern("leadsto mixing state events and transition labels is not supported")
        if not _lo0(p.interval):
            raise UnsupportedPattern("leadsto on state events needs an interval starting at 0")
        if variant == "transition":
            raise UnsupportedPattern("the transition observer watches labels; use the data or place observer")
        if variant == "place" and any(isinstance(e, StorePredicate) for e in events):
            raise UnsupportedPattern("the place observer watches places; use the data observer for predicates")
        return
    if any(states):
        raise UnsupportedPattern(f"{kind} supports transition labels and init only")
    if variant == "place":
        raise UnsupportedPattern("the place observer needs state events (p:Place) in a leadsto pattern")
    if variant == "transition":
        if isinstance(p, LeadsTo):
            if not _lo0(p.interval):
                raise UnsupportedPattern("the transition observer handles intervals starting at 0; use the data observer")
            return
        if isinstance(p, AbsentAfter):
            return
        raise UnsupportedPattern(f"no transition observer for {kind} (data only)")


def build_observer(p, variant: str = "data", binding=None, deterministic: bool = True) -> Observer:
    """Build the observer of ``p``.

    ``binding`` is a :class:`Binding` (its resolved pattern is used) or a
    system net to bind against; with neither, ``p`` is used as given.
    Returns an :class:`Observer`, which also unpacks as
    ``(net, error_label, sync_spec)``.
    """
    if isinstance(binding, Net):
        binding = bind(p, binding)
    if isinstance(binding, Binding):
        p = binding.pattern
        system = binding.net
    else:
        system = Net(name="env")
    _check(p, variant, deterministic)
    b = _B(f"observer_{variant}")
    events = {f: getattr(p, f) for f in ("e1", "e2", "e3") if hasattr(p, f)}
    if isinstance(p, PresentLasting):
        _data_lasting(b, p, system)
    elif isinstance(p, LeadsTo) and is_state_event(p.e1):
        if variant == "place":
            _place_leadsto(b, p, system)
        else:
            _data_leadsto_states(b, p, system)
    elif variant == "transition":
        if isinstance(p, LeadsTo):
            _transition_leadsto(b, p, deterministic)
        else:
            _transition_absent_after(b, p)
    else:
        _DATA_LABEL[type(p)](b, p, events)
    net = b.net()
    labels = set()
    for e in events.values():
        labels |= set(_labels(e))
    sync = SyncSpec(frozenset(labels), tuple(b.pairs))
    return Observer(net, ERROR_LABEL, sync, ObserverMeta.of(net, labels), variant, p)
