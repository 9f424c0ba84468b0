"""Pattern syntax tree.

Events name what the observer watches: a set of transition labels (a
disjunction), a place becoming marked or empty, a store predicate, or the
reserved system start ``init``.  Patterns are frozen dataclasses; ``str``
gives back the concrete syntax accepted by :func:`parse_pattern`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from ..expr import Expr, format_expr, parse_expr
from ..model import TimeInterval, as_fraction

__all__ = [
    "EventSpec", "LabelSet", "PlaceEntry", "PlaceExit", "StorePredicate", "Init", "INIT",
    "Pattern", "LeadsTo", "LeadsToFirstBefore", "LeadsToFirstAfter", "AbsentAfter",
    "AbsentBeforeDur", "PresentAfter", "PresentFirstBefore", "PresentLasting", "Implies",
    "events_of", "is_state_event",
]


@dataclass(frozen=True)
class LabelSet:
    labels: frozenset

    def __init__(self, labels):
        if isinstance(labels, str):
            labels = [labels]
        object.__setattr__(self, "labels", frozenset(labels))

    def __str__(self):
        labs = sorted(self.labels)
        if len(labs) == 1:
            return labs[0]
        return "(" + "|".join(labs) + ")"


@dataclass(frozen=True)
class PlaceEntry:
    place: str

    def __str__(self):
        return f"p:{self.place}"


@dataclass(frozen=True)
class PlaceExit:
    place: str

    def __str__(self):
        return f"p:!{self.place}"


@dataclass(frozen=True)
class StorePredicate:
    expr: Expr

    def __init__(self, expr):
        object.__setattr__(self, "expr", parse_expr(expr) if isinstance(expr, str) else expr)

    def __str__(self):
        return "{" + format_expr(self.expr) + "}"


@dataclass(frozen=True)
class Init:
    def __str__(self):
        return "init"


INIT = Init()

EventSpec = Union[LabelSet, PlaceEntry, PlaceExit, StorePredicate, Init]


def is_state_event(e) -> bool:
    return isinstance(e, (PlaceEntry, PlaceExit, StorePredicate))


def _event(e):
    return LabelSet(e) if isinstance(e, (str, list, tuple, set, frozenset)) else e


def _iv(i):
    return TimeInterval.parse(i) if isinstance(i, str) else i


def _num(x):
    s = str(x)
    return str(x.numerator) if isinstance(x, Fraction) and x.denominator == 1 else s


class _Base:
    def __post_init__(self):
        for f in ("e1", "e2", "e3"):
            if hasattr(self, f):
                object.__setattr__(self, f, _event(getattr(self, f)))
        if hasattr(self, "interval"):
            object.__setattr__(self, "interval", _iv(self.interval))
        if hasattr(self, "duration"):
            d = as_fraction(self.duration)
            if d < 0:
                raise ValueError("negative duration")
            object.__setattr__(self, "duration", d)


@dataclass(frozen=True)
class LeadsTo(_Base):
    """Every E1 is followed by a first E2 whose delay lies in I."""

    e1: EventSpec
    e2: EventSpec
    interval: TimeInterval

    def __str__(self):
        return f"{self.e1} leadsto {self.e2} within {self.interval}"


@dataclass(frozen=True)
class LeadsToFirstBefore(_Base):
    e1: EventSpec
    e2: EventSpec
    interval: TimeInterval
    e3: EventSpec

    def __str__(self):
        return f"{self.e1} leadsto first {self.e2} within {self.interval} before {self.e3}"


@dataclass(frozen=True)
class LeadsToFirstAfter(_Base):
    e1: EventSpec
    e2: EventSpec
    interval: TimeInterval
    e3: EventSpec

    def __str__(self):
        return f"{self.e1} leadsto first {self.e2} within {self.interval} after {self.e3}"


@dataclass(frozen=True)
class AbsentAfter(_Base):
    """No E2 at a delay in I after the first E1 (fields in reading order)."""

    e2: EventSpec
    e1: EventSpec
    interval: TimeInterval

    def __str__(self):
        return f"absent {self.e2} after {self.e1} within {self.interval}"


@dataclass(frozen=True)
class AbsentBeforeDur(_Base):
    e1: EventSpec
    e2: EventSpec
    duration: Fraction

    def __str__(self):
        return f"absent {self.e1} before {self.e2} for duration {_num(self.duration)}"


@dataclass(frozen=True)
class PresentAfter(_Base):
    e1: EventSpec
    e2: EventSpec
    interval: TimeInterval

    def __str__(self):
        return f"present {self.e1} after {self.e2} within {self.interval}"


@dataclass(frozen=True)
class PresentFirstBefore(_Base):
    e1: EventSpec
    e2: EventSpec
    interval: TimeInterval

    def __str__(self):
        return f"present first {self.e1} before {self.e2} within {self.interval}"


@dataclass(frozen=True)
class PresentLasting(_Base):
    e1: EventSpec
    duration: Fraction

    def __post_init__(self):
        super().__post_init__()
        if not is_state_event(self.e1):
            raise ValueError("'lasting' needs a state event (place or store predicate); transitions have no duration")

    def __str__(self):
        return f"present {self.e1} lasting {_num(self.duration)}"


@dataclass(frozen=True)
class Implies:
    antecedent: "Pattern"
    consequent: "Pattern"

    def __str__(self):
        return f"({self.antecedent}) => ({self.consequent})"


Pattern = Union[
    LeadsTo, LeadsToFirstBefore, LeadsToFirstAfter, AbsentAfter, AbsentBeforeDur,
    PresentAfter, PresentFirstBefore, PresentLasting, Implies,
]


def events_of(p) -> list:
    """The event fields of a (non-implication) pattern as ``(name, event)``."""
    return [(f, getattr(p, f)) for f in ("e1", "e2", "e3") if hasattr(p, f)]
