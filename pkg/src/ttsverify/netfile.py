"""Line-oriented text format for nets.

::

    # comment
    net NAME
    place P [init N]
    var X : bool|int[a..b] [= V]
    trans T [label L] [in P*N ...] [out P*N ...] [read P*N ...] [inhib P*N ...]
            [interval I] [pre "EXPR"] [act "STMT; ..."]
    prio T1 > T2

An omitted label makes the transition silent, an omitted interval is
``[0,inf[``.  Items may appear in any order; ``place`` lines may be
omitted for places only mentioned in arcs.
"""
from __future__ import annotations

import re

from .expr import ExprSyntaxError, parse_action, parse_expr
from .model import Diagnostic, Net, NetError, Transition, TimeInterval, VarDecl, validate_net

__all__ = ["NetSyntaxError", "parse_net", "print_net", "load_net"]


class NetSyntaxError(ValueError):
    def __init__(self, msg, line=0, col=0, source=""):
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{col}: {msg}")
        self.line = line
        self.col = col
        self.msg = msg


_TOK = re.compile(r'\s*(?:"((?:[^"\\]|\\.)*)"|([\[\]][^\[\]"]*[\[\]])|([^\s"]+))')
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.'|]*$")
_ARC = re.compile(r"(.+?)(?:\*(\d+))?$")
_VAR = re.compile(
    r"var\s+(?P<name>[A-Za-z_][A-Za-z0-9_.]*)\s*:\s*(?P<ty>bool|int\s*\[\s*(?P<lo>-?\d+)\s*\.\.\s*(?P<hi>-?\d+)\s*\])"
    r"\s*(?:=\s*(?P<init>\S+))?\s*$"
)
_KEYS = {"label", "in", "out", "read", "inhib", "interval", "pre", "act"}


def _strip_comment(line: str) -> str:
    quoted = False
    for k, ch in enumerate(line):
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:k]
    return line


def _tokens(line, lineno, source):
    out = []
    pos = 0
    while pos < len(line):
        if not line[pos:].strip():
            break
        m = _TOK.match(line, pos)
        if not m:
            raise NetSyntaxError("unterminated string", lineno, pos + 1, source)
        if m.group(1) is not None:
            out.append(("str", m.group(1).replace('\\"', '"'), m.start(1)))
        elif m.group(2) is not None:
            out.append(("iv", m.group(2), m.start(2) + 1))
        else:
            out.append(("word", m.group(3), m.start(3) + 1))
        pos = m.end()
    return out


def _name(tok, what, lineno, source):
    kind, val, col = tok
    if kind != "word" or not _NAME.match(val):
        raise NetSyntaxError(f"expected {what}, found {val!r}", lineno, col, source)
    return val


def parse_net(text: str, source: str = "") -> Net:
    """Parse the text format; raise :class:`NetSyntaxError` (with line and
    column) or :class:`NetError` (validation diagnostics, with line numbers)."""
    name = "net"
    places: dict = {}
    variables: list = []
    transitions: list = []
    prios: list = []
    lines_of: dict = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).rstrip()
        if not line.strip():
            continue
        toks = _tokens(line, lineno, source)
        head = toks[0][1]
        end = (len(line) + 1, lineno)

        def need(k, what):
            if k >= len(toks):
                raise NetSyntaxError(f"expected {what}, found end of line", lineno, end[0], source)
            return toks[k]

        if head == "net":
            name = _name(need(1, "a net name"), "a net name", lineno, source)
            if len(toks) > 2:
                raise NetSyntaxError("unexpected text after net name", lineno, toks[2][2], source)
        elif head == "place":
            p = _name(need(1, "a place name"), "a place name", lineno, source)
            n = 0
            if len(toks) > 2:
                if toks[2][1] != "init":
                    raise NetSyntaxError(f"expected 'init', found {toks[2][1]!r}", lineno, toks[2][2], source)
                kind, val, col = need(3, "a token count")
                if not val.isdigit():
                    raise NetSyntaxError(f"expected a token count, found {val!r}", lineno, col, source)
                n = int(val)
                if len(toks) > 4:
                    raise NetSyntaxError("unexpected text after token count", lineno, toks[4][2], source)
            if p in places:
                raise NetSyntaxError(f"place {p} declared twice", lineno, toks[1][2], source)
            places[p] = n
            lines_of[p] = lineno
        elif head == "var":
            m = _VAR.match(line.strip())
            if not m:
                raise NetSyntaxError("expected 'var NAME : bool|int[a..b] [= VALUE]'", lineno, toks[0][2], source)
            vname = m.group("name")
            init = m.group("init")
            if m.group("lo") is None:
                if init not in (None, "true", "false"):
                    raise NetSyntaxError(f"bad boolean {init!r}", lineno, line.index(init) + 1, source)
                variables.append(VarDecl(vname, "bool", init=None if init is None else init == "true"))
            else:
                try:
                    iv = None if init is None else int(init)
                except ValueError:
                    raise NetSyntaxError(f"bad integer {init!r}", lineno, line.index(init) + 1, source) from None
                variables.append(VarDecl(vname, "int", int(m.group("lo")), int(m.group("hi")), iv))
            lines_of[vname] = lineno
        elif head == "trans":
            transitions.append(_parse_trans(toks, lineno, source, end[0]))
            lines_of[transitions[-1].name] = lineno
        elif head == "prio":
            a = _name(need(1, "a transition name"), "a transition name", lineno, source)
            kind, val, col = need(2, "'>'")
            if val != ">":
                raise NetSyntaxError(f"expected '>', found {val!r}", lineno, col, source)
            b = _name(need(3, "a transition name"), "a transition name", lineno, source)
            if len(toks) > 4:
                raise NetSyntaxError("unexpected text after priority", lineno, toks[4][2], source)
            prios.append((a, b))
            lines_of[(a, b)] = lineno
        else:
            raise NetSyntaxError(
                f"unknown declaration {head!r} (expected net, place, var, trans or prio)", lineno, toks[0][2], source
            )

    order = list(places)
    for t in transitions:
        for p in sorted(t.places()):
            if p not in places:
                places[p] = 0
                order.append(p)
    net = Net({p: places[p] for p in order}, transitions, None, variables, prios, name=name)
    diags = validate_net(net)
    if diags:
        raise NetError([_locate(d, lines_of, source) for d in diags])
    return net


def _locate(d: Diagnostic, lines_of: dict, source: str) -> Diagnostic:
    kind, _, rest = d.locus.partition(" ")
    key = tuple(x.strip() for x in rest.split(">")) if kind == "prio" else rest
    line = lines_of.get(key)
    if line is None:
        return d
    return Diagnostic(f"{source + ':' if source else ''}{line}: {d.locus}", d.message)


def _parse_trans(toks, lineno, source, eol) -> Transition:
    def need(k, what):
        if k >= len(toks):
            raise NetSyntaxError(f"expected {what}, found end of line", lineno, eol, source)
        return toks[k]

    tname = _name(need(1, "a transition name"), "a transition name", lineno, source)
    kw: dict = {}
    seen = set()
    k = 2
    while k < len(toks):
        kind, key, col = toks[k]
        if kind != "word" or key not in _KEYS:
            raise NetSyntaxError(
                f"expected one of {', '.join(sorted(_KEYS))}, found {key!r}", lineno, col, source
            )
        if key in seen:
            raise NetSyntaxError(f"duplicate {key!r}", lineno, col, source)
        seen.add(key)
        k += 1
        if key == "label":
            kw["label"] = _name(need(k, "a label"), "a label", lineno, source)
            k += 1
        elif key in ("in", "out", "read", "inhib"):
            arcs = {}
            while k < len(toks) and toks[k][0] == "word" and toks[k][1] not in _KEYS:
                _, val, c = toks[k]
                m = _ARC.match(val)
                place, n = m.group(1), int(m.group(2) or 1)
                if not _NAME.match(place):
                    raise NetSyntaxError(f"bad place name {place!r}", lineno, c, source)
                if n < 1:
                    raise NetSyntaxError("arc weight must be positive", lineno, c, source)
                arcs[place] = arcs.get(place, 0) + n
                k += 1
            if not arcs:
                raise NetSyntaxError(f"expected places after {key!r}", lineno, need(k, "a place")[2], source)
            kw[{"in": "consume", "out": "produce", "read": "read", "inhib": "inhibit"}[key]] = arcs
        elif key == "interval":
            kind, val, c = need(k, "an interval")
            if kind != "iv":
                raise NetSyntaxError(f"expected an interval such as [1,2] or [0,inf[, found {val!r}", lineno, c, source)
            try:
                kw["interval"] = TimeInterval.parse(val)
            except (ValueError, ZeroDivisionError) as e:
                raise NetSyntaxError(str(e), lineno, c, source) from None
            k += 1
        else:
            kind, val, c = need(k, "a quoted expression")
            if kind != "str":
                raise NetSyntaxError(f"expected a quoted expression, found {val!r}", lineno, c, source)
            try:
                kw["pre" if key == "pre" else "act"] = parse_expr(val) if key == "pre" else parse_action(val)
            except ExprSyntaxError as e:
                raise NetSyntaxError(f"in {key}: {e}", lineno, c + 1, source) from None
            k += 1
    return Transition(tname, **kw)


def print_net(net: Net) -> str:
    """Text form of ``net``; :func:`parse_net` reads it back."""
    lines = [f"net {net.name}"]
    for p in net.places:
        n = net.initial_marking_map.get(p, 0)
        lines.append(f"place {p}" + (f" init {n}" if n else ""))
    for d in net.schema:
        lines.append(str(d))
    for t in net.transitions:
        lines.append(str(t))
    for h, lo in sorted(net.priorities):
        lines.append(f"prio {h} > {lo}")
    return "\n".join(lines) + "\n"


def load_net(path) -> Net:
    with open(path, encoding="utf-8") as fh:
        return parse_net(fh.read(), source=str(path))
