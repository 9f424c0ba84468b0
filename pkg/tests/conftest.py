import pytest

from ttsverify import fixtures
from ttsverify.netfile import load_net


@pytest.fixture(scope="session")
def dc():
    return load_net(fixtures.path("doubleclick"))


@pytest.fixture(scope="session")
def shipped():
    """name -> (net, manifest entry) for every bundled fixture."""
    return {n: (load_net(fixtures.path(n)), fixtures.manifest()[n]) for n in fixtures.names()}
