"""Real-time specification patterns: syntax, binding, oracles and observers."""
from .ast import (
    INIT, AbsentAfter, AbsentBeforeDur, EventSpec, Implies, Init, LabelSet, LeadsTo,
    LeadsToFirstAfter, LeadsToFirstBefore, Pattern, PlaceEntry, PlaceExit, PresentAfter,
    PresentFirstBefore, PresentLasting, StorePredicate, events_of, is_state_event,
)
from .binding import Binding, BindingError, bind, with_init
from .grammar import PatternSyntaxError, parse_pattern
from .observers import (
    ERROR_LABEL, Observer, ObserverMeta, SyncSpec, UnsupportedPattern, build_observer,
    supported_variants,
)
from .oracle import OracleResult, bounded_verdict, enumerated_verdict, oracle_eval

__all__ = [
    "INIT", "AbsentAfter", "AbsentBeforeDur", "EventSpec", "Implies", "Init", "LabelSet", "LeadsTo",
    "LeadsToFirstAfter", "LeadsToFirstBefore", "Pattern", "PlaceEntry", "PlaceExit", "PresentAfter",
    "PresentFirstBefore", "PresentLasting", "StorePredicate", "events_of", "is_state_event",
    "Binding", "BindingError", "bind", "with_init", "PatternSyntaxError", "parse_pattern",
    "ERROR_LABEL", "Observer", "ObserverMeta", "SyncSpec", "UnsupportedPattern", "build_observer",
    "supported_variants", "OracleResult", "bounded_verdict", "enumerated_verdict", "oracle_eval",
]
