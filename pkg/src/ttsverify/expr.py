"""Guard and action language used by transitions.

Expressions are small boolean/integer terms over the store variables::

    dbl == true && n < 3
    !(x + 1 >= y) || flag

Actions are ``;``-separated assignments ``x := expr`` executed left to
right, each one seeing the updates made before it.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

__all__ = [
    "Expr", "Const", "Var", "Unary", "Binary", "TRUE", "FALSE",
    "ExprSyntaxError", "ExprTypeError", "DomainError",
    "parse_expr", "parse_action", "format_expr", "format_action",
    "expr_vars", "infer_type", "evaluate", "compile_expr", "conj", "neg",
]


class ExprSyntaxError(ValueError):
    def __init__(self, msg: str, text: str = "", pos: int = 0):
        super().__init__(f"{msg} at column {pos + 1}" + (f" in {text!r}" if text else ""))
        self.pos = pos


class ExprTypeError(TypeError):
    pass


class DomainError(ValueError):
    """An assignment left the declared bounds of an integer variable."""


@dataclass(frozen=True)
class Const:
    value: Union[bool, int]


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "!" or "-"
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Var, Unary, Binary]
Action = tuple  # tuple[tuple[str, Expr], ...]

TRUE = Const(True)
FALSE = Const(False)

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_.]*)"
    r"|(?P<op>:=|==|!=|<=|>=|&&|\|\||[<>!+\-();]))"
)

# binding power of binary operators, lowest first
_LEVELS = [("||",), ("&&",), ("==", "!="), ("<", "<=", ">", ">="), ("+", "-")]


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError("unexpected character", text, pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, value=None, kind=None):
        tok = self.tokens[self.i]
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = value or kind
            raise ExprSyntaxError(f"expected {want!r}, got {tok[1] or 'end of input'!r}", self.text, tok[2])
        self.i += 1
        return tok

    def expr(self, level: int = 0) -> Expr:
        if level == len(_LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        while self.peek()[0] == "op" and self.peek()[1] in _LEVELS[level]:
            op = self.take()[1]
            left = Binary(op, left, self.expr(level + 1))
        return left

    def unary(self) -> Expr:
        kind, value, pos = self.peek()
        if kind == "op" and value in ("!", "-"):
            self.take()
            return Unary(value, self.unary())
        if kind == "op" and value == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if kind == "num":
            self.take()
            return Const(int(value))
        if kind == "name":
            self.take()
            if value == "true":
                return TRUE
            if value == "false":
                return FALSE
            return Var(value)
        raise ExprSyntaxError(f"unexpected {value or 'end of input'!r}", self.text, pos)


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    p.take(kind="eof")
    return e


def parse_action(text: str) -> Action:
    p = _Parser(text)
    stmts = []
    while p.peek()[0] != "eof":
        name = p.take(kind="name")[1]
        p.take(":=")
        stmts.append((name, p.expr()))
        if p.peek()[1] == ";":
            p.take(";")
        elif p.peek()[0] != "eof":
            tok = p.peek()
            raise ExprSyntaxError("expected ';'", text, tok[2])
    return tuple(stmts)


def format_expr(e: Expr, level: int = 0) -> str:
    if isinstance(e, Const):
        return str(e.value).lower() if isinstance(e.value, bool) else str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        return e.op + format_expr(e.arg, len(_LEVELS))
    mine = next(i for i, ops in enumerate(_LEVELS) if e.op in ops)
    s = f"{format_expr(e.left, mine)} {e.op} {format_expr(e.right, mine + 1)}"
    return f"({s})" if mine < level else s


def format_action(a: Action) -> str:
    return "; ".join(f"{v} := {format_expr(e)}" for v, e in a)


def expr_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Unary):
        return expr_vars(e.arg)
    if isinstance(e, Binary):
        return expr_vars(e.left) | expr_vars(e.right)
    return set()


def conj(a: Expr, b: Expr) -> Expr:
    if a == TRUE:
        return b
    if b == TRUE:
        return a
    return Binary("&&", a, b)


def neg(a: Expr) -> Expr:
    return Unary("!", a)


_BOOL_OPS = {"&&", "||"}
_CMP_OPS = {"<", "<=", ">", ">="}
_EQ_OPS = {"==", "!="}


def infer_type(e: Expr, types: Mapping[str, str]) -> str:
    """Return ``"bool"`` or ``"int"``; raise ExprTypeError when ill-typed."""
    if isinstance(e, Const):
        return "bool" if isinstance(e.value, bool) else "int"
    if isinstance(e, Var):
        if e.name not in types:
            raise ExprTypeError(f"undeclared variable {e.name!r}")
        return types[e.name]
    if isinstance(e, Unary):
        t = infer_type(e.arg, types)
        want = "bool" if e.op == "!" else "int"
        if t != want:
            raise ExprTypeError(f"operator {e.op!r} applied to {t}")
        return want
    lt, rt = infer_type(e.left, types), infer_type(e.right, types)
    if e.op in _BOOL_OPS:
        if lt != "bool" or rt != "bool":
            raise ExprTypeError(f"operator {e.op!r} needs booleans")
        return "bool"
    if e.op in _EQ_OPS:
        if lt != rt:
            raise ExprTypeError(f"comparing {lt} with {rt}")
        return "bool"
    if lt != "int" or rt != "int":
        raise ExprTypeError(f"operator {e.op!r} needs integers")
    return "bool" if e.op in _CMP_OPS else "int"


_BINOPS: dict[str, Callable] = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
}


def evaluate(e: Expr, env: Mapping[str, Union[bool, int]]):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Unary):
        v = evaluate(e.arg, env)
        return (not v) if e.op == "!" else -v
    if e.op == "&&":
        return bool(evaluate(e.left, env)) and bool(evaluate(e.right, env))
    if e.op == "||":
        return bool(evaluate(e.left, env)) or bool(evaluate(e.right, env))
    return _BINOPS[e.op](evaluate(e.left, env), evaluate(e.right, env))


def compile_expr(e: Expr, index: Mapping[str, int]) -> Callable[[Sequence], object]:
    """Turn ``e`` into a closure over a store value tuple laid out by ``index``."""
    if isinstance(e, Const):
        v = e.value
        return lambda s: v
    if isinstance(e, Var):
        i = index[e.name]
        return lambda s: s[i]
    if isinstance(e, Unary):
        f = compile_expr(e.arg, index)
        if e.op == "!":
            return lambda s: not f(s)
        return lambda s: -f(s)
    lf, rf = compile_expr(e.left, index), compile_expr(e.right, index)
    if e.op == "&&":
        return lambda s: lf(s) and rf(s)
    if e.op == "||":
        return lambda s: lf(s) or rf(s)
    op = _BINOPS[e.op]
    return lambda s: op(lf(s), rf(s))
