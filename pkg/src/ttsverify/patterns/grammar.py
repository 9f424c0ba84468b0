"""Concrete syntax for patterns.

Examples::

    absent double after double within [0,2]
    click leadsto (single|double) within [0,1[
    present p:Ready lasting 3
    (absent single after init for interval [0;10]) => (absent double after init within [0,inf[)

See ``docs/grammar.md`` for the full grammar.
"""
from __future__ import annotations

import re
from fractions import Fraction

from ..expr import ExprSyntaxError, parse_expr
from ..model import TimeInterval
from .ast import (
    INIT, AbsentAfter, AbsentBeforeDur, Implies, LabelSet, LeadsTo, LeadsToFirstAfter,
    LeadsToFirstBefore, PlaceEntry, PlaceExit, PresentAfter, PresentFirstBefore,
    PresentLasting, StorePredicate,
)

__all__ = ["parse_pattern", "PatternSyntaxError", "KEYWORDS"]

KEYWORDS = {
    "absent", "present", "first", "after", "before", "within", "for", "interval",
    "duration", "lasting", "leadsto", "init", "or",
}

_NUM = r"\d+(?:\.\d+)?(?:/\d+)?"
_TOKEN = re.compile(
    r"\s*(?:"
    rf"(?P<iv>[\[\]]\s*{_NUM}\s*[,;]\s*(?:{_NUM}|inf|oo|∞|\+inf)\s*[\[\]])"
    r"|(?P<pred>\{[^{}]*\})"
    r"|(?P<place>p:!?[A-Za-z_][A-Za-z0-9_.']*)"
    rf"|(?P<num>{_NUM})"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_.']*)"
    r"|(?P<op>=>|\|\||[|()∨]))"
)


class PatternSyntaxError(ValueError):
    def __init__(self, msg, text="", pos=0):
        super().__init__(f"{msg} at column {pos + 1}" + (f" in {text!r}" if text else ""))
        self.pos = pos


def _tokens(text):
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PatternSyntaxError(f"unexpected character {text[pos:].strip()[:1]!r}", text, pos)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    return out


def _number(s: str) -> Fraction:
    return Fraction(s)


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else ("eof", "", len(self.text))

    def fail(self, expected):
        kind, val, pos = self.peek()
        found = "end of input" if kind == "eof" else repr(val)
        raise PatternSyntaxError(f"expected {expected}, found {found}", self.text, pos)

    def is_kw(self, word, k=0):
        kind, val, _ = self.peek(k)
        return kind == "name" and val == word

    def kw(self, word):
        if not self.is_kw(word):
            self.fail(repr(word))
        self.i += 1

    def op(self, sym):
        kind, val, _ = self.peek()
        if kind != "op" or val != sym:
            self.fail(repr(sym))
        self.i += 1

    # pattern := primary ['=>' pattern]
    def pattern(self):
        left = self.primary()
        kind, val, _ = self.peek()
        if kind == "op" and val == "=>":
            self.i += 1
            return Implies(left, self.pattern())
        return left

    def primary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "(":
            save = self.i
            self.i += 1
            try:
                p = self.pattern()
                self.op(")")
                return p
            except PatternSyntaxError:
                self.i = save
        return self.simple()

    def simple(self):
        if self.is_kw("absent"):
            self.i += 1
            a = self.event()
            if self.is_kw("after"):
                self.i += 1
                b = self.event()
                return AbsentAfter(a, b, self.within())
            if self.is_kw("before"):
                self.i += 1
                b = self.event()
                return AbsentBeforeDur(a, b, self.for_duration())
            self.fail("'after' or 'before'")
        if self.is_kw("present"):
            self.i += 1
            if self.is_kw("first"):
                self.i += 1
                a = self.event()
                self.kw("before")
                b = self.event()
                return PresentFirstBefore(a, b, self.within())
            a = self.event()
            if self.is_kw("after"):
                self.i += 1
                b = self.event()
                return PresentAfter(a, b, self.within())
            if self.is_kw("lasting"):
                self.i += 1
                d = self.number()
                try:
                    return PresentLasting(a, d)
                except ValueError as e:
                    raise PatternSyntaxError(str(e), self.text, self.peek()[2]) from None
            self.fail("'after' or 'lasting'")
        if self.peek()[0] == "eof":
            self.fail("a pattern")
        a = self.event()
        self.kw("leadsto")
        first = False
        if self.is_kw("first"):
            self.i += 1
            first = True
        b = self.event()
        iv = self.within()
        if first and self.is_kw("before"):
            self.i += 1
            return LeadsToFirstBefore(a, b, iv, self.event())
        if first and self.is_kw("after"):
            self.i += 1
            return LeadsToFirstAfter(a, b, iv, self.event())
        return LeadsTo(a, b, iv)

    def within(self) -> TimeInterval:
        if self.is_kw("within"):
            self.i += 1
        elif self.is_kw("for") and self.is_kw("interval", 1):
            self.i += 2
        else:
            self.fail("'within' or 'for interval'")
        kind, val, pos = self.peek()
        if kind != "iv":
            self.fail("an interval such as [0,2] or [1,inf[")
        self.i += 1
        try:
            return TimeInterval.parse(val.replace("∞", "inf").replace("oo", "inf").replace("+inf", "inf"))
        except ValueError as e:
            raise PatternSyntaxError(str(e), self.text, pos) from None

    def for_duration(self) -> Fraction:
        if self.is_kw("for") and self.is_kw("duration", 1):
            self.i += 2
        elif self.is_kw("within"):
            self.i += 1
        else:
            self.fail("'for duration'")
        return self.number()

    def number(self) -> Fraction:
        kind, val, _ = self.peek()
        if kind != "num":
            self.fail("a duration")
        self.i += 1
        return _number(val)

    def label(self) -> str:
        kind, val, _ = self.peek()
        if kind != "name" or val in KEYWORDS:
            self.fail("a label")
        self.i += 1
        return val

    def event(self):
        kind, val, pos = self.peek()
        if kind == "name" and val == "init":
            self.i += 1
            return INIT
        if kind == "place":
            self.i += 1
            body = val[2:]
            return PlaceExit(body[1:]) if body.startswith("!") else PlaceEntry(body)
        if kind == "pred":
            self.i += 1
            try:
                return StorePredicate(parse_expr(val[1:-1]))
            except ExprSyntaxError as e:
                raise PatternSyntaxError(f"bad store predicate: {e}", self.text, pos) from None
        if kind == "op" and val == "(":
            self.i += 1
            labels = self.labels()
            self.op(")")
            return LabelSet(labels)
        if kind == "name":
            return LabelSet(self.labels())
        self.fail("an event (label, (a|b), p:Place, {predicate} or init)")

    def labels(self):
        out = [self.label()]
        while True:
            kind, val, _ = self.peek()
            if (kind == "op" and val in ("|", "||", "∨")) or (kind == "name" and val == "or"):
                self.i += 1
                out.append(self.label())
            else:
                return out


def parse_pattern(text: str):
    """Parse one pattern; raise :class:`PatternSyntaxError` with a hint."""
    p = _Parser(text)
    result = p.pattern()
    if p.peek()[0] != "eof":
        p.fail("end of input")
    return result
