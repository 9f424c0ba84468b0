import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ttsverify.model import Net, TimeInterval, Transition
from ttsverify.semantics import (
    NotFireable, TimeBlocked, TimedTrace, TraceError, default_grid, duration, elapse, explore_bounded, fire,
    fireables, initial_state, run,
)

from netgen import random_acyclic_net

H = Fraction(1, 2)


def at_s1_after(dc, d):
    return elapse(fire(initial_state(dc), "click1", dc), d, dc)


def test_initial_state(dc):
    s = initial_state(dc)
    assert dc.marking_dict(s.marking) == {"s0": 1}
    assert s.store["dbl"] is False
    assert s.intervals == {"click1": TimeInterval()}


def test_initial_state_copies_static_interval():
    net = Net({"p": 1}, [Transition("t", consume=["p"], interval="[1,1]")])
    assert initial_state(net).intervals == {"t": TimeInterval(1, 1)}
    assert initial_state(Net()).dynamic == ()


def test_fireables(dc):
    assert fireables(initial_state(dc), dc) == {"click1"}
    s = at_s1_after(dc, 1)
    assert s.intervals["tau"] == TimeInterval(0, 0)
    assert "click2" in s.intervals
    assert fireables(s, dc) == {"tau"}
    assert fireables(at_s1_after(dc, H), dc) == {"click2"}
    net = Net({"p": 1}, [Transition("t", consume=["p"], interval="[2,5]")])
    assert fireables(initial_state(net), net) == set()


def test_fire(dc):
    s = fire(initial_state(dc), "click1", dc)
    assert dc.marking_dict(s.marking) == {"s1": 1}
    s2 = fire(s, "click2", dc)
    assert s2.marking == s.marking and s2.store["dbl"] is True
    # tau kept its clock through the read-arc firing
    assert s2.intervals["tau"] == s.intervals["tau"]
    with pytest.raises(NotFireable):
        fire(s, "single", dc)


def test_fire_self_disabling():
    net = Net({"p": 1}, [Transition("t", consume=["p"])])
    s = fire(initial_state(net), "t", net)
    assert s.dynamic == ()


def test_intermediate_marking_resets():
    # t consumes and gives back the token u also needs: u is newly enabled
    net = Net({"p": 1}, [Transition("t", consume=["p"], produce=["p"], interval="[1,1]"),
                         Transition("u", read=["p"], interval="[2,3]")])
    s = fire(elapse(initial_state(net), 1, net), "t", net)
    assert s.intervals["u"] == TimeInterval(2, 3)


def test_elapse(dc):
    s = fire(initial_state(dc), "click1", dc)
    assert elapse(s, 1, dc).intervals["tau"] == TimeInterval(0, 0)
    assert elapse(s, 0, dc) == s
    with pytest.raises(TimeBlocked) as e:
        elapse(s, Fraction(3, 2), dc)
    assert "tau" in str(e.value)


def test_run_examples(dc):
    s = run(initial_state(dc), ["click1", 1, "tau", "single"], dc)
    assert dc.marking_dict(s.marking) == {"s0": 1} and s.store["dbl"] is False
    assert run(initial_state(dc), [], dc) == initial_state(dc)
    s = run(initial_state(dc), ["click1", H, "click2", H, "tau", "double"], dc)
    assert dc.marking_dict(s.marking) == {"s0": 1} and s.store["dbl"] is False
    with pytest.raises(TraceError) as e:
        run(initial_state(dc), ["click1", 2], dc)
    assert e.value.index == 1 and isinstance(e.value.cause, TimeBlocked)


def test_duration():
    assert duration(TimedTrace(["E1", H, "E2", Fraction(1, 4)])) == Fraction(3, 4)
    assert duration(TimedTrace(["E1", "E2"])) == 0
    assert duration(TimedTrace([3])) == 3


def test_trace_text_round_trip():
    t = TimedTrace(["a", Fraction(1, 3), "b", 2])
    assert TimedTrace.parse(t.dump()) == t
    assert TimedTrace(["a", 1, 2, 0, "b"]).merged() == TimedTrace(["a", 3, "b"])


def test_explore_bounded_examples(dc):
    net = Net({"p": 1}, [Transition("t", consume=["p"], interval="[0,0]")])
    assert explore_bounded(net, 2, [1], 0) == {TimedTrace([]), TimedTrace(["t"])}
    assert explore_bounded(dc, 0, [H], 2) == {TimedTrace([])}
    traces = explore_bounded(dc, 6, [H], 2)
    assert TimedTrace(["click1", H, "click2", H, "tau", "double"]) in traces


def test_default_grid(dc, shipped):
    assert default_grid(dc) == H
    assert default_grid(Net()) == H
    net = Net({"p": 1}, [Transition("t", consume=["p"], interval="[2,4]"), Transition("u", interval="[3,3]")])
    assert default_grid(net) == H


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_replay_soundness(seed):
    net = random_acyclic_net(random.Random(seed))
    for sigma in explore_bounded(net, 4, None, 3):
        run(initial_state(net), sigma, net)
        # determinism
        assert run(initial_state(net), sigma, net) == run(initial_state(net), sigma, net)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.fractions(0, 3, max_denominator=4), st.fractions(0, 3, max_denominator=4))
def test_time_shift_and_urgency(seed, d1, d2):
    net = random_acyclic_net(random.Random(seed))
    s = initial_state(net)
    try:
        a = elapse(elapse(s, d1, net), d2, net)
    except TimeBlocked:
        a = None
    try:
        b = elapse(s, d1 + d2, net)
    except TimeBlocked:
        b = None
    if a is not None and b is not None:
        assert a == b
    if a is not None:
        assert b is not None
    for t, iv in s.dynamic:
        if iv.hi is not None:
            with pytest.raises(TimeBlocked):
                elapse(s, iv.hi + Fraction(1, 8), net)
