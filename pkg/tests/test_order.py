import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from monosgt.order import OrderCone, OrderError, cone_leq, cone_ll, is_totally_ordered

PLUS = OrderCone.parse("+")
MINUS = OrderCone.parse("-")
PP = OrderCone.parse("++")


def test_scalar_examples():
    assert cone_leq(PLUS, 1, 2)
    assert cone_leq(MINUS, 1, 0.5)
    assert not cone_leq(PLUS, 1, 0.5)


def test_orthant_incomparable_pair():
    assert not cone_leq(PP, (1, 2), (2, 1))
    assert not cone_leq(PP, (2, 1), (1, 2))


def test_strict_order_examples():
    assert cone_ll(PLUS, 0, 1)
    assert not cone_ll(PP, (0, 0), (1, 0))
    assert cone_ll(PP, (0, 0), (1, 1))


def test_total_order_examples():
    assert is_totally_ordered(PLUS, [0.5, 2])
    assert is_totally_ordered(PP, [(0, 0), (1, 1), (2, 2)])
    assert not is_totally_ordered(PP, [(0, 1), (1, 0)])


def test_dimension_mismatch():
    with pytest.raises(OrderError):
        cone_leq(PP, (1,), (1, 2))
    with pytest.raises(OrderError):
        cone_ll(PLUS, (1, 2), (1, 2))


@pytest.mark.parametrize("signs", [(), (0,), (1, 2), (1.0, -0.5)])
def test_invalid_signs(signs):
    with pytest.raises(OrderError):
        OrderCone(signs)


@pytest.mark.parametrize("text", ["", "+a", "0", "x"])
def test_invalid_sign_strings(text):
    with pytest.raises(OrderError):
        OrderCone.parse(text)


def test_constructors_and_text():
    assert OrderCone.standard(2) == PP
    assert OrderCone.opposite(1) == MINUS
    assert str(OrderCone.parse("+-+")) == "+-+"
    assert PLUS.reversed() == MINUS


cones = st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=4).map(lambda s: OrderCone(tuple(s)))
small = st.integers(-3, 3).map(float)


def vectors(n):
    return st.lists(small, min_size=n, max_size=n).map(np.array)


@st.composite
def cone_and_triple(draw):
    c = draw(cones)
    return c, draw(vectors(c.dimension)), draw(vectors(c.dimension)), draw(vectors(c.dimension))


@settings(max_examples=300, deadline=None)
@given(cone_and_triple())
def test_partial_order_axioms(ct):
    c, a, b, d = ct
    assert cone_leq(c, a, a)
    if cone_leq(c, a, b) and cone_leq(c, b, a):
        assert np.array_equal(a, b)
    if cone_leq(c, a, b) and cone_leq(c, b, d):
        assert cone_leq(c, a, d)


@settings(max_examples=200, deadline=None)
@given(cone_and_triple())
def test_strict_implies_weak(ct):
    c, a, b, _ = ct
    if cone_ll(c, a, b):
        assert cone_leq(c, a, b)
    # a boundary pair (one equal coordinate) is never strictly ordered
    b2 = b.copy()
    b2[0] = a[0]
    assert not cone_ll(c, a, b2)


@settings(max_examples=200, deadline=None)
@given(small, small)
def test_opposite_scalar_is_swap(a, b):
    assert cone_leq(MINUS, a, b) == cone_leq(PLUS, b, a)


@settings(max_examples=200, deadline=None)
@given(cone_and_triple(), st.floats(0, 10))
def test_cone_axioms(ct, scale):
    c, a, b, _ = ct
    if c.contains(a):
        assert c.contains(scale * a)
        if c.contains(b):
            assert c.contains(a + b)
        if c.contains(-a):
            assert not np.any(a)
