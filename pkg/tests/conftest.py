from fractions import Fraction

import pytest
from hypothesis import strategies as st

from lipiso.metric import PointedMetricSpace, shortest_path_closure


def make_space(labels, matrix, name="X", base=0):
    return PointedMetricSpace(labels, base, [[Fraction(v) for v in row] for row in matrix], name)


@pytest.fixture
def equilateral():
    return make_space(["e", "a", "b"], [[0, 1, 1], [1, 0, 1], [1, 1, 0]], "eq")


@pytest.fixture
def collinear():
    return make_space(["0", "1", "2"], [[0, 1, 2], [1, 0, 1], [2, 1, 0]], "col")


@pytest.fixture
def two_point():
    return make_space(["e", "a"], [[0, 2], [2, 0]], "two")


@st.composite
def metric_spaces(draw, min_n=2, max_n=5):
    """Shortest-path closures of random small positive weights."""
    n = draw(st.integers(min_n, max_n))
    w = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i):
            num = draw(st.integers(1, 6))
            den = draw(st.sampled_from((1, 2)))
            w[i][j] = w[j][i] = Fraction(num, den)
    d = shortest_path_closure(w)
    return PointedMetricSpace(["e"] + [f"p{i}" for i in range(1, n)], 0, d, "H")
