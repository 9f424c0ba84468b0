import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ttsverify import fixtures
from ttsverify.model import NetError, TimeInterval
from ttsverify.netfile import NetSyntaxError, load_net, parse_net, print_net

from netgen import random_acyclic_net, random_cyclic_net


def test_doubleclick_shape(dc):
    assert len(dc.transitions) == 5
    assert dc.places == ("s0", "s1", "s2")
    assert [d.name for d in dc.schema] == ["dbl"]
    assert dc.priorities == {("tau", "click2")}
    assert dc.transition("tau").interval == TimeInterval(1, 1)
    assert dc.transition("click1").interval.is_trivial
    assert dc.initial_marking_map == {"s0": 1}


def test_empty_file():
    n = parse_net("")
    assert n.places == () and n.transitions == ()
    assert parse_net("# only a comment\n\n").transitions == ()


def test_reflexive_priority():
    with pytest.raises(NetError) as ei:
        parse_net("trans a\nprio a > a\n")
    d = ei.value.diagnostics
    assert len(d) == 1 and "reflexive" in d[0].message and d[0].locus.startswith("2:")


@pytest.mark.parametrize("text, col, word", [
    ("place p init x", 14, "token count"),
    ("trans t interval [1,0]", 18, "empty interval"),
    ("frob x", 1, "unknown declaration"),
    ("trans t label", 14, "expected a label"),
    ('trans t pre "oops', 12, "unterminated"),
])
def test_syntax_errors_are_located(text, col, word):
    with pytest.raises(NetSyntaxError) as ei:
        parse_net("net n\n" + text, "f.tts")
    e = ei.value
    assert (e.line, e.col) == (2, col)
    assert str(e).startswith(f"f.tts:2:{col}:") and word in str(e)


def test_comments_keep_hash_in_strings():
    n = parse_net('var x : int[0..3] = 0\ntrans t act "x := 1" # set\n')
    assert n.transition("t").act


@pytest.mark.parametrize("name", fixtures.names())
def test_round_trip_fixtures(shipped, name):
    net, _ = shipped[name]
    again = parse_net(print_net(net))
    assert print_net(again) == print_net(net)
    assert again.transitions == net.transitions and again.places == net.places


@settings(max_examples=60, deadline=None)
@given(rng=st.randoms(use_true_random=False))
def test_round_trip_random(rng):
    for net in (random_acyclic_net(rng), random_cyclic_net(rng, ("a", "b"), "r")):
        again = parse_net(print_net(net))
        assert again.transitions == net.transitions
        assert again.initial_marking_map == net.initial_marking_map


@pytest.mark.parametrize("path", fixtures.mutants(), ids=lambda p: p.stem)
def test_mutants_parse(path):
    net = load_net(path)
    assert "__obs.obs" in net.places
