from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ttsverify.expr import DomainError, ExprSyntaxError, ExprTypeError, parse_action, parse_expr
from ttsverify.model import (
    Net, Store, TimeInterval, Transition, VarDecl, apply_action, eval_expr, structurally_enabled, validate_net,
)
from ttsverify import fixtures
from ttsverify.netfile import load_net


# intervals

def test_interval_parse_and_print():
    for text in ["[0,1]", "]0,4]", "[0,2[", "[3,inf[", "]1/2,3/2["]:
        assert str(TimeInterval.parse(text)) == text
    assert TimeInterval.parse("[0;2]") == TimeInterval(0, 2)


def test_interval_invariants():
    with pytest.raises(ValueError):
        TimeInterval(2, 1)
    with pytest.raises(ValueError):
        TimeInterval(1, 1, hi_open=True)
    with pytest.raises(ValueError):
        TimeInterval(-1, 1)
    assert TimeInterval(1, None).hi_open
    assert TimeInterval().is_trivial


def test_interval_shift_truncates_at_zero():
    assert TimeInterval(1, 1).shift(1) == TimeInterval(0, 0)
    assert TimeInterval(1, 3).shift(2) == TimeInterval(0, 1)
    assert TimeInterval(2, None).shift(Fraction(1, 2)) == TimeInterval(Fraction(3, 2), None)


def test_interval_intersection():
    assert TimeInterval(0, 3).intersect(TimeInterval(2, None)) == TimeInterval(2, 3)
    assert TimeInterval(0, 1).intersect(TimeInterval(2, 3)) is None
    assert TimeInterval(0, 1, hi_open=True).intersect(TimeInterval(1, 2)) is None


# validation

def test_doubleclick_is_valid(dc):
    assert validate_net(dc) == []
    assert len(dc.transitions) == 5 and len(dc.places) == 3 and len(dc.schema) == 1
    assert dc.priorities == {("tau", "click2")}


def test_every_fixture_is_valid():
    for n in fixtures.names():
        assert validate_net(load_net(fixtures.path(n))) == []


def test_reflexive_priority():
    net = Net(["p"], [Transition("t", consume=["p"])], priorities=[("t", "t")])
    diags = validate_net(net)
    assert len(diags) == 1 and "reflexive priority" in diags[0].message


def test_dangling_place():
    diags = validate_net(Net(["p"], [Transition("t", consume=["q"])]))
    assert len(diags) == 1 and "undeclared place" in diags[0].message
    assert diags[0].locus == "transition t"


def test_priority_cycle_and_unknown():
    net = Net([], [Transition("a"), Transition("b")], priorities=[("a", "b"), ("b", "a"), ("a", "zz")])
    msgs = [d.message for d in validate_net(net)]
    assert any("cyclic" in m for m in msgs) and any("unknown transition" in m for m in msgs)


def test_undeclared_variable_and_bad_type():
    net = Net([], [Transition("t", pre="x == 1")])
    assert validate_net(net)
    net = Net([], [Transition("t", act="b := 3")], variables=[VarDecl("b", "bool")])
    assert validate_net(net)


def _mutations(net):
    """Single-fault variants of ``net``."""
    t0 = net.transitions[0]
    yield Net(net.places, net.transitions, net.initial_marking_map, net.schema,
              set(net.priorities) | {(t0.name, t0.name)}, name=net.name)
    bad = Transition(t0.name, t0.label, consume=dict(t0.consume) | {"nowhere": 1}, produce=t0.produce,
                     read=t0.read, inhibit=t0.inhibit, interval=t0.interval, pre=t0.pre, act=t0.act)
    yield Net(net.places, (bad,) + net.transitions[1:], net.initial_marking_map, net.schema,
              net.priorities, name=net.name)
    yield Net(net.places, net.transitions + (t0,), net.initial_marking_map, net.schema,
              net.priorities, name=net.name)
    yield Net(net.places, net.transitions, net.initial_marking_map, net.schema,
              set(net.priorities) | {(t0.name, "ghost")}, name=net.name)
    guard = Transition(t0.name, t0.label, consume=t0.consume, produce=t0.produce, read=t0.read,
                       inhibit=t0.inhibit, interval=t0.interval, pre="undeclared_var", act=t0.act)
    yield Net(net.places, (guard,) + net.transitions[1:], net.initial_marking_map, net.schema,
              net.priorities, name=net.name)


@pytest.mark.parametrize("name", fixtures.names())
def test_single_fault_mutations_rejected(name):
    net = load_net(fixtures.path(name))
    for k, m in enumerate(_mutations(net)):
        assert validate_net(m), f"mutation {k} of {name} accepted"


# enabledness

def test_structurally_enabled_examples(dc):
    m0, s0 = dc.initial_marking, dc.initial_store
    assert structurally_enabled(dc, m0, s0, "click1")
    assert not structurally_enabled(dc, m0, s0, "tau")
    assert not structurally_enabled(dc, {"s2": 1}, s0, "double")
    assert structurally_enabled(dc, {"s2": 1}, s0, "single")


def test_read_and_inhibitor_arcs():
    net = Net(["p", "q"], [Transition("t", read={"p": 2}, inhibit=["q"])])
    assert not structurally_enabled(net, {"p": 1}, net.initial_store, "t")
    assert structurally_enabled(net, {"p": 2}, net.initial_store, "t")
    assert not structurally_enabled(net, {"p": 2, "q": 1}, net.initial_store, "t")


@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3), st.integers(0, 2), st.integers(0, 2))
def test_enabledness_monotone(c, r, i, extra_p, extra_q):
    net = Net(["p", "q"], [Transition("t", consume={"p": c} if c else {}, read={"p": r} if r else {},
                                      inhibit={"q": i} if i else {})])
    s = net.initial_store
    for p in range(4):
        for q in range(1, 4):
            base = structurally_enabled(net, {"p": p, "q": q}, s, "t")
            if base:
                assert structurally_enabled(net, {"p": p + extra_p, "q": q}, s, "t")
            if i and not base:
                assert not structurally_enabled(net, {"p": p, "q": q + extra_q}, s, "t")


# expressions and actions

def test_action_examples():
    schema = [VarDecl("dbl", "bool")]
    s = Store.initial(schema)
    assert apply_action(s, "dbl := true")["dbl"] is True
    assert apply_action(s, ()) == s
    n = Store([VarDecl("n", "int", 0, 3)], [3])
    with pytest.raises(DomainError):
        apply_action(n, "n := n + 1")


def test_actions_run_left_to_right():
    s = Store.initial([VarDecl("x", "int", 0, 9), VarDecl("y", "int", 0, 9)])
    out = apply_action(s, "x := 2; y := x + 1; x := y + y")
    assert (out["x"], out["y"]) == (6, 3)


@given(st.integers(0, 5), st.integers(0, 5), st.booleans())
def test_action_frame(x, y, b):
    s = Store([VarDecl("x", "int", 0, 9), VarDecl("y", "int", 0, 9), VarDecl("b", "bool")], [x, y, b])
    out = apply_action(s, "x := y + 1")
    assert out["y"] == y and out["b"] == b and out["x"] == y + 1


def test_eval_expr():
    s = Store([VarDecl("n", "int", 0, 3), VarDecl("f", "bool")], [2, True])
    assert eval_expr(s, "n + 1 == 3 && f") is True
    assert eval_expr(s, "!(n >= 2) || n != 2") is False
    assert eval_expr(s, "-n < 0") is True


def test_expression_errors():
    with pytest.raises(ExprSyntaxError):
        parse_expr("a &&")
    with pytest.raises(ExprSyntaxError):
        parse_action("x = 1")
    net = Net([], [Transition("t", pre="f + 1")], variables=[VarDecl("f", "bool")])
    assert any("guard" in d.message for d in validate_net(net))
    with pytest.raises(ExprTypeError):
        from ttsverify.expr import infer_type
        infer_type(parse_expr("f + 1"), {"f": "bool"})
