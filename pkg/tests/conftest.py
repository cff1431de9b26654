import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from orlicz_gauge.space import GridFunction


def random_gridfunction(rng, max_cells=24, log_grid=False, zero_prob=0.2):
    n = int(rng.integers(1, max_cells + 1))
    if log_grid:
        edges = np.geomspace(10.0 ** rng.uniform(-3, 0), 10.0 ** rng.uniform(1, 4), n + 1)
    else:
        edges = np.sort(rng.uniform(0.0, 10.0, n + 1))
        edges[0] = max(edges[0], 0.0)
        while np.any(np.diff(edges) <= 0):
            edges = np.sort(rng.uniform(0.0, 10.0, n + 1))
    values = rng.uniform(0.0, 10.0, n)
    values[rng.uniform(size=n) < zero_prob] = 0.0
    return GridFunction(edges, values)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# hypothesis strategy: small step functions on (0, ~40]
@st.composite
def gridfunctions(draw, max_cells=12):
    n = draw(st.integers(min_value=1, max_value=max_cells))
    deltas = np.asarray(draw(st.lists(st.floats(min_value=0.01, max_value=3.0),
                                      min_size=n, max_size=n)))
    start = draw(st.floats(min_value=0.0, max_value=2.0))
    edges = np.concatenate([[start], start + np.cumsum(deltas)])
    values = np.asarray(draw(st.lists(
        st.one_of(st.just(0.0), st.floats(min_value=0.0, max_value=8.0)),
        min_size=n, max_size=n)))
    return GridFunction(edges, values)
