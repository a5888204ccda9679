import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_graph(rng, n, density=0.5):
    from plantmatch.graph import Graph
    total = n * (n - 1) // 2
    return Graph(n, np.flatnonzero(rng.random(total) < density))
