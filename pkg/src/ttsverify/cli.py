"""Command line front end: ``ttsverify <command> ...``.

Exit codes: 0 the property holds (or the command succeeded), 1 it is
violated, 2 any error (syntax, binding, cap, unsupported observer).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .compose import CompositionError
from .expr import DomainError
from .model import NetError
from .netfile import NetSyntaxError, load_net, parse_net, print_net
from .patterns import (
    BindingError, PatternSyntaxError, UnsupportedPattern, bind, enumerated_verdict, parse_pattern, with_init,
)
from .patterns.binding import INIT_TRANSITION
from .scg import Caps, CapExceeded, build_scg
from .semantics import SemanticsError, TimedTrace, elapse, fire, initial_state, is_delay
from .verify import bench, check, check_innocuous, format_bench

__all__ = ["main", "parse_net", "print_net", "parse_pattern", "parse_caps"]

ERROR_MARK = "!error"


def parse_caps(text: str, base: Caps = Caps()) -> Caps:
    """``N``, ``N,M`` or ``classes=N,tokens=M``."""
    classes, tokens = base.max_classes, base.max_tokens
    parts = [x.strip() for x in text.split(",") if x.strip()]
    for k, part in enumerate(parts):
        key, eq, val = part.partition("=")
        if not eq:
            key, val = ("classes" if k == 0 else "tokens"), part
        try:
            n = int(val)
        except ValueError:
            raise ValueError(f"bad cap {part!r}") from None
        if n < 1:
            raise ValueError(f"cap must be positive: {part!r}")
        if key == "classes":
            classes = n
        elif key == "tokens":
            tokens = n
        else:
            raise ValueError(f"unknown cap {key!r} (classes or tokens)")
    return Caps(classes, tokens)


def _caps(args) -> Caps:
    caps = Caps()
    env = os.environ.get("TTS_CAPS")
    if env:
        caps = parse_caps(env, caps)
    if getattr(args, "caps", None):
        caps = parse_caps(args.caps, caps)
    return caps


def _show_time(x: Fraction) -> str:
    return str(x) if x.denominator == 1 else f"{x} (~{float(x):.4g})"


def _trace_text(sigma: TimedTrace, error=True) -> str:
    return sigma.dump() + (ERROR_MARK + "\n" if error else "")


def _print_trace(sigma: TimedTrace, out):
    now = Fraction(0)
    for it in sigma:
        if is_delay(it):
            now += it
            print(f"    @{it}", file=out)
        else:
            print(f"    {it}    [t={_show_time(now)}]", file=out)


def _print_verdict(v, out, indent=""):
    print(f"{indent}{v.pattern}: {'HOLDS' if v.holds else 'VIOLATED'}", file=out)
    if v.sub_verdicts:
        for name, sub in zip(("antecedent", "consequent"), v.sub_verdicts):
            print(f"{indent}  {name}:", file=out)
            _print_verdict(sub, out, indent + "    ")
        return
    st = v.stats
    if st:
        print(
            f"{indent}  observer {v.variant}; classes {st['classes_explored']}, edges {st['edges']}, "
            f"C_O(S) = {st['complexity']}; {st['wall_time']:.3f}s",
            file=out,
        )
    if not v.holds and v.system_trace is not None:
        print(f"{indent}  counterexample (system events; the observer flags an error at the end):", file=out)
        _print_trace(v.system_trace, out)


def cmd_check(args, out) -> int:
    net = load_net(args.model)
    p = parse_pattern(args.pattern)
    v = check(net, p, args.observer, caps=_caps(args), deterministic=not args.nondeterministic, strict=True)
    if args.trace_out and not v.holds:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            fh.write(_trace_text(v.system_trace))
    if args.json:
        json.dump(v.to_json(), out, indent=1)
        out.write("\n")
    else:
        _print_verdict(v, out)
        if args.trace_out and not v.holds:
            print(f"  trace written to {args.trace_out}", file=out)
    return 0 if v.holds else 1


def cmd_oracle(args, out) -> int:
    net = load_net(args.model)
    p = parse_pattern(args.pattern)
    r = enumerated_verdict(p, bind(p, net, strict=True) if not hasattr(p, "antecedent") else net,
                           args.depth, Fraction(args.horizon), None if args.grid is None else Fraction(args.grid))
    if args.json:
        json.dump({
            "holds": r.holds, "explored": r.explored,
            "witness": None if r.witness is None else [
                {"delay": str(x)} if is_delay(x) else {"event": x} for x in r.witness
            ],
        }, out, indent=1)
        out.write("\n")
    else:
        print(f"{p}: {'HOLDS' if r.holds else 'VIOLATED'} on {r.explored} bounded traces "
              f"(depth {args.depth}, horizon {args.horizon})", file=out)
        if r.witness is not None:
            print("  violating trace:", file=out)
            _print_trace(r.witness, out)
    return 0 if r.holds else 1


def cmd_scg(args, out) -> int:
    net = load_net(args.model)
    g = build_scg(net, _caps(args))
    if args.json:
        data = {"classes": g.class_count, "edges": g.edge_count, "size": g.size}
        if args.full:
            data["graph"] = g.to_json()
        json.dump(data, out, indent=1)
        out.write("\n")
    else:
        print(f"{net.name}: {g.class_count} classes, {g.edge_count} edges", file=out)
        if not args.stats and not args.dump:
            out.write(g.dump_text())
    if args.dump:
        with open(args.dump, "w", encoding="utf-8") as fh:
            fh.write(g.dump_json() if args.dump.endswith(".json") else g.dump_text())
    return 0


def cmd_innocuous(args, out) -> int:
    obs = load_net(args.observer)
    labels = [x.strip() for x in args.sync.split(",") if x.strip()]
    unknown = sorted(set(labels) - obs.labels())
    if unknown:
        raise BindingError(f"no observer transition carries label {', '.join(unknown)}")
    r = check_innocuous(obs, caps=_caps(args), sync_labels=labels)
    if args.json:
        json.dump(r.to_json(), out, indent=1)
        out.write("\n")
    else:
        print(r, file=out)
    return 0 if r.ok else 1


def cmd_bench(args, out) -> int:
    net = load_net(args.model)
    variants = [x.strip() for x in args.variants.split(",") if x.strip()]
    rows = bench(net, parse_pattern(args.pattern), variants, _caps(args), strict=True,
                 deterministic=not args.nondeterministic)
    if args.json:
        json.dump([{**r, "complexity": str(r["complexity"])} for r in rows], out, indent=1)
        out.write("\n")
    else:
        print(f"{net.name}: {args.pattern}", file=out)
        print(format_bench(rows), file=out)
    return 0


def cmd_replay(args, out) -> int:
    net = load_net(args.model)
    with open(args.trace, encoding="utf-8") as fh:
        text = fh.read()
    marked = any(line.strip() == ERROR_MARK for line in text.splitlines())
    sigma = TimedTrace.parse("\n".join(x for x in text.splitlines() if not x.strip().startswith("!")))
    if INIT_TRANSITION in sigma.events():
        net = with_init(net)
    s = initial_state(net)
    now = Fraction(0)
    print(f"step 0  t=0  {s.describe(net)}", file=out)
    for k, it in enumerate(sigma, start=1):
        try:
            if is_delay(it):
                s = elapse(s, it, net)
                now += it
                what = f"wait {it}"
            else:
                s = fire(s, it, net)
                what = f"fire {it}"
        except SemanticsError as e:
            print(f"step {k}  t={_show_time(now)}  cannot {('wait ' + str(it)) if is_delay(it) else ('fire ' + it)}: {e}",
                  file=out)
            return 2
        print(f"step {k}  t={_show_time(now)}  {what}  ->  {s.describe(net)}", file=out)
    if marked:
        print(f"error reached at t={_show_time(now)}", file=out)
    else:
        print(f"end of trace at t={_show_time(now)}", file=out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ttsverify", description="Check real-time patterns on time transition systems.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, caps=True, js=True):
        if caps:
            p.add_argument("--caps", help="exploration caps: N, N,M or classes=N,tokens=M (env TTS_CAPS)")
        if js:
            p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("check", help="decide a pattern with an observer")
    p.add_argument("model")
    p.add_argument("-p", "--pattern", required=True)
    p.add_argument("--observer", default="auto", choices=["auto", "transition", "data", "place"])
    g = p.add_mutually_exclusive_group()
    g.add_argument("--deterministic", action="store_true", default=True)
    g.add_argument("--nondeterministic", action="store_true")
    p.add_argument("--trace-out", help="write the counterexample as a trace file for 'replay'")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("oracle", help="decide a pattern by bounded trace enumeration")
    p.add_argument("model")
    p.add_argument("-p", "--pattern", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--horizon", required=True)
    p.add_argument("--grid")
    common(p, caps=False)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("scg", help="build the state class graph")
    p.add_argument("model")
    p.add_argument("--stats", action="store_true", help="counts only")
    p.add_argument("--dump", help="write the graph (JSON when the name ends in .json)")
    p.add_argument("--full", action="store_true", help="include the graph in --json output")
    common(p)
    p.set_defaults(func=cmd_scg)

    p = sub.add_parser("innocuous", help="check an observer cannot restrict the system")
    p.add_argument("observer")
    p.add_argument("--sync", required=True, help="comma-separated synchronised labels")
    common(p)
    p.set_defaults(func=cmd_innocuous)

    p = sub.add_parser("bench", help="compare observer variants on one pattern")
    p.add_argument("model")
    p.add_argument("-p", "--pattern", required=True)
    p.add_argument("--variants", default="data,place")
    p.add_argument("--nondeterministic", action="store_true")
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("replay", help="play a trace back step by step")
    p.add_argument("model")
    p.add_argument("trace")
    p.set_defaults(func=cmd_replay)
    return ap


_USER_ERRORS = (
    NetSyntaxError, NetError, PatternSyntaxError, BindingError, UnsupportedPattern, CapExceeded,
    CompositionError, DomainError, SemanticsError, OSError, ValueError,
)


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except _USER_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
