import numpy as np
import pytest

from bosonmatch.corpus import connected_graphs, matrix_corpus


@pytest.fixture(scope="session")
def corpus6():
    return connected_graphs(6)


@pytest.fixture(scope="session")
def corpus5():
    return connected_graphs(5)


@pytest.fixture(scope="session")
def matrices():
    return matrix_corpus()


class StubRng:
    """Deterministic stand-in for numpy Generator: replays queued uniforms."""

    def __init__(self, values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


@pytest.fixture
def stub_rng():
    return StubRng
