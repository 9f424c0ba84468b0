"""Real-time pattern verification for Time Transition Systems.

Systems are time Petri nets extended with a bounded data store, read and
inhibitor arcs and priorities.  Patterns are checked by composing the
system with an observer net and searching the state class graph of the
product for the observer's error event.
"""
from .model import (
    Net, Transition, TimeInterval, VarDecl, Store, Diagnostic, NetError,
    validate_net, structurally_enabled, eval_expr, apply_action, UNBOUNDED,
)
from .semantics import (
    ConcreteState, TimedTrace, initial_state, fireables, fire, elapse, run,
    duration, explore_bounded,
)
from .compose import compose_tts, compose_on_places, CompositionMap, CompositionError
from .scg import build_scg, initial_class, class_fireables, class_successor, Caps, CapExceeded
from .netfile import parse_net, print_net, load_net
from .patterns import parse_pattern
from .verify import check, check_innocuous, complexity, bench

__all__ = [
    "Net", "Transition", "TimeInterval", "VarDecl", "Store", "Diagnostic", "NetError",
    "validate_net", "structurally_enabled", "eval_expr", "apply_action", "UNBOUNDED",
    "ConcreteState", "TimedTrace", "initial_state", "fireables", "fire", "elapse", "run",
    "duration", "explore_bounded", "compose_tts", "compose_on_places", "CompositionMap",
    "CompositionError", "build_scg", "initial_class", "class_fireables", "class_successor",
    "Caps", "CapExceeded", "parse_net", "print_net", "load_net", "parse_pattern",
    "check", "check_innocuous", "complexity", "bench",
]

__version__ = "0.1.0"
