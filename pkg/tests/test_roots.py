import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from oracles import P, cubic_roots

from monosgt.roots import DegenerateRootError, scalar_roots


@pytest.mark.parametrize("y", [0.5, 3.0, 4.2, 4.5, 4.8, 6.0, 20.0])
def test_cubic_preimages_match_companion_matrix(y):
    got = [r.x for r in scalar_roots(lambda z: P(z) - y, -5, 10)]
    assert got == pytest.approx(cubic_roots(y), abs=1e-10)


@pytest.mark.parametrize("y,double,simple", [(4.0, 2.0, 0.5), (5.0, 1.0, 2.5)])
def test_tangencies_are_double_roots(y, double, simple):
    roots = scalar_roots(lambda z: P(z) - y, -5, 10)
    assert len(roots) == 2
    d = [r for r in roots if r.double]
    s = [r for r in roots if not r.double]
    assert len(d) == 1 and abs(d[0].x - double) < 1e-7
    assert len(s) == 1 and abs(s[0].x - simple) < 1e-12


def test_no_roots():
    assert scalar_roots(lambda x: x * x + 1, -10, 10) == []


def test_root_on_grid_node_is_not_duplicated():
    roots = scalar_roots(lambda x: x - 1.0, 0.0, 2.0, cells=4)
    assert [r.x for r in roots] == [1.0]


def test_pole_is_not_a_root():
    roots = scalar_roots(lambda x: 1 / (x - 0.3) + 0 * x, -1, 1, cells=10)
    assert roots == []


def test_flat_zero_is_degenerate():
    with pytest.raises(DegenerateRootError):
        scalar_roots(lambda x: np.maximum(np.abs(x) - 0.5, 0.0), -2, 2)


def test_empty_interval():
    with pytest.raises(ValueError):
        scalar_roots(lambda x: x, 1.0, 1.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-8, 8), min_size=1, max_size=3, unique=True))
def test_random_separated_polynomials(zeros):
    zeros = sorted(zeros)
    assume(all(b - a > 1e-2 for a, b in zip(zeros, zeros[1:])))
    g = lambda x: np.prod([x - z for z in zeros], axis=0)  # noqa: E731
    got = [r.x for r in scalar_roots(g, -10, 10)]
    assert got == pytest.approx(zeros, abs=1e-8)
