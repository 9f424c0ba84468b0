"""Random small nets for the property and acceptance suites."""
from __future__ import annotations

import random

from ttsverify.model import Net, TimeInterval, Transition

LABELS = ("a", "b", "c")


def _interval(rng):
    lo = rng.randint(0, 3)
    return TimeInterval(lo, rng.randint(lo, 3))


def random_acyclic_net(rng: random.Random, name="rnd") -> Net:
    """At most 4 places and 5 transitions, closed integer intervals up to 3.

    Tokens only move from lower to higher places, so every run stops after
    a bounded number of firings and a bounded exploration is conclusive.
    """
    n_places = rng.randint(1, 4)
    places = [f"p{k}" for k in range(n_places)]
    marking = {p: 0 for p in places}
    marking["p0"] = rng.randint(1, 2)
    if n_places > 1 and rng.random() < 0.4:
        marking["p1"] = 1
    transitions = []
    for k in range(rng.randint(1, 5)):
        src = rng.randrange(n_places)
        consume = {places[src]: 1}
        produce = {}
        if src + 1 < n_places and rng.random() < 0.7:
            produce[places[rng.randrange(src + 1, n_places)]] = 1
        read, inhibit = {}, {}
        if n_places > 1 and rng.random() < 0.2:
            other = places[rng.randrange(n_places)]
            if other != places[src]:
                (read if rng.random() < 0.5 else inhibit)[other] = 1
        label = rng.choice(LABELS + (None,))
        transitions.append(Transition(
            f"t{k}", label, consume=consume, produce=produce, read=read, inhibit=inhibit,
            interval=_interval(rng),
        ))
    return Net(marking, transitions, name=name)


def random_cyclic_net(rng: random.Random, labels=LABELS, name="rnd") -> Net:
    """A small 1-safe state machine (cycles allowed) for composition tests."""
    n_places = rng.randint(1, 3)
    places = [f"{name}_p{k}" for k in range(n_places)]
    marking = {p: 0 for p in places}
    marking[places[0]] = 1
    transitions = []
    for k in range(rng.randint(1, 4)):
        a, b = rng.randrange(n_places), rng.randrange(n_places)
        label = rng.choice(tuple(labels) + (None,))
        lo = rng.randint(0, 2)
        hi = None if rng.random() < 0.25 else rng.randint(max(lo, 1), 3)
        transitions.append(Transition(
            f"{name}_t{k}", label, consume={places[a]: 1}, produce={places[b]: 1},
            interval=TimeInterval(lo, hi),
        ))
    return Net(marking, transitions, name=name)


def trivial_sync(net: Net, labels) -> Net:
    """Copy of ``net`` whose transitions labelled in ``labels`` get [0,inf[."""
    ts = [
        Transition(t.name, t.label, consume=dict(t.consume), produce=dict(t.produce), read=dict(t.read),
                   inhibit=dict(t.inhibit), interval=TimeInterval() if t.label in labels else t.interval)
        for t in net.transitions
    ]
    return Net({p: net.initial_marking_map.get(p, 0) for p in net.places}, ts, name=net.name)


def random_partner(rng: random.Random, sync_labels, private=("c",), name="R") -> Net:
    """A state machine offering every sync label from every place, at any time."""
    n_places = rng.randint(1, 3)
    places = [f"{name}_p{k}" for k in range(n_places)]
    marking = {p: 0 for p in places}
    marking[places[0]] = 1
    transitions = []
    for a in range(n_places):
        for lab in sync_labels:
            transitions.append(Transition(
                f"{name}_t{len(transitions)}", lab, consume={places[a]: 1},
                produce={places[rng.randrange(n_places)]: 1},
            ))
    for _ in range(rng.randint(0, 2)):
        a, b = rng.randrange(n_places), rng.randrange(n_places)
        lo = rng.randint(0, 2)
        transitions.append(Transition(
            f"{name}_t{len(transitions)}", rng.choice(tuple(private) + (None,)), consume={places[a]: 1},
            produce={places[b]: 1}, interval=TimeInterval(lo, rng.randint(max(lo, 1), 3)),
        ))
    return Net(marking, transitions, name=name)


def random_pair(rng: random.Random):
    """Two nets sharing label ``a``: either both offer it without deadline, or
    the right one is an always-ready partner for the left one's timed ``a``."""
    left = random_cyclic_net(rng, ("a", "b"), "L")
    if rng.random() < 0.5:
        return trivial_sync(left, {"a"}), trivial_sync(random_cyclic_net(rng, ("a", "c"), "R"), {"a"})
    return left, random_partner(rng, ("a",))
