import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import P, bisect, cubic_roots

from monosgt.charmap import (CharacteristicMap, ClosedFormMap, ComposedMap, DegenerateCharacteristicError,
                             MapDomainError, PiecewiseLinearMap, UnsupportedDimensionError,
                             cardinality_profile, check_antimonotone, check_no_cycles_by_order,
                             check_weakly_nondecreasing, dedupe, equilibria_at_input, local_bound,
                             sample_branches, verify_characteristic)
from monosgt.dynsys import parse_system
from monosgt.order import OrderCone
from monosgt.smallgain import R_VERTICES, lookup


def test_k2_at_fold_values(k2):
    assert k2(4.0) == pytest.approx((0.5, 2.0), abs=1e-9)
    assert k2(5.0) == pytest.approx((1.0, 2.5), abs=1e-9)


@pytest.mark.parametrize("u", [0.0, 1.0, 3.9, 4.3, 4.5, 4.99, 5.2, 8.0, 30.0])
def test_k2_matches_companion_roots(k2, u):
    assert k2(u) == pytest.approx(tuple(cubic_roots(u)), abs=1e-9)


def test_equilibrium_stability(sec5_z):
    eqs = equilibria_at_input(sec5_z, 4.5)
    assert [e.stability for e in eqs] == ["attracting", "repelling", "attracting"]
    at4 = equilibria_at_input(sec5_z, 4.0)
    assert [e.stability for e in at4] == ["attracting", "semi-stable-above"]
    assert at4[1].basin_note == "attracts from above only"
    at5 = equilibria_at_input(sec5_z, 5.0)
    assert [e.stability for e in at5] == ["semi-stable-below", "attracting"]


def test_output_characteristic_values():
    k_w = lookup("sec5-original").k_w()
    assert k_w(4.0) == pytest.approx((0.2, 0.8), abs=1e-9)
    assert k_w(5.0) == pytest.approx((4 / 29, 0.5), abs=1e-9)


def test_loop_map_value(loop_map):
    # k1(2.5) = 5 + 1/(1 + 6.25) = 149/29, a single preimage above the folds
    oracle = bisect(lambda z: P(z) - 149 / 29, 2.0, 4.0)
    got = loop_map(2.5)
    assert len(got) == 1 and abs(got[0] - oracle) < 1e-10
    assert round(got[0], 4) == 2.5295


def test_profile(k2):
    prof = cardinality_profile(k2, 0.0, 6.0)
    assert [c for _, _, c in prof.proper_intervals()] == [1, 3, 1]
    assert prof.folds == pytest.approx([4.0, 5.0], abs=1e-7)
    d = prof.to_dict()
    assert set(d) == {"intervals", "folds"}


@pytest.mark.parametrize("grid", [101, 301, 1201])
def test_profile_is_refinement_invariant(k2, grid):
    prof = cardinality_profile(k2, 0.0, 6.0, grid)
    assert [c for _, _, c in prof.proper_intervals()] == [1, 3, 1]
    assert prof.folds == pytest.approx([4.0, 5.0], abs=1e-7)


def test_root_completeness_on_grid(sec5_z):
    # every value is a zero of the rhs, and no zero is missed compared with the oracle
    for u in np.linspace(0.0, 6.0, 25):
        vals = [e.state[0] for e in equilibria_at_input(sec5_z, u)]
        assert all(abs(sec5_z.f([v], u)[0]) < 1e-9 for v in vals)
        assert len(vals) == len(dedupe(cubic_roots(u), 1e-6))


def test_graph_is_closed(k2):
    # limits of graph points from either side of a fold are in the graph at the fold
    for fold in (4.0, 5.0):
        at = k2(fold)
        for side in (-1, 1):
            for v in k2(fold + side * 1e-9):
                assert min(abs(v - a) for a in at) < 1e-3


def test_local_boundedness(k2):
    b = local_bound(k2, 0.0, 6.0)
    assert b["finite"] and b["stable"]
    assert b["sup"] == pytest.approx(max(cubic_roots(6.0)), abs=1e-9)


def test_branch_samples(k2):
    rows = sample_branches(k2, 3.0, 6.0, 7)
    us = sorted({u for u, _, _ in rows})
    assert us == pytest.approx([3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0])
    assert sum(1 for u, _, _ in rows if u == 4.5) == 3


def test_order_properties(k2):
    grid = np.linspace(0.0, 6.0, 49)
    rep = check_weakly_nondecreasing(k2, grid)
    assert rep.passed and rep.checked == 49 * 48 // 2
    k_w = lookup("sec5-original").k_w()
    assert check_antimonotone(k_w, grid).passed
    assert not check_antimonotone(k_w, grid, sense="same").passed
    assert check_weakly_nondecreasing(k_w, grid, cone_out=OrderCone((-1,))).passed
    with pytest.raises(ValueError):
        check_antimonotone(k2, grid, sense="sideways")


def test_decreasing_map_witness():
    rep = check_weakly_nondecreasing(ClosedFormMap("-u", (0.0, 1.0)), [0.0, 1.0])
    assert not rep.passed
    assert rep.witness["p"] == 0.0 and rep.witness["q"] == 1.0
    assert rep.witness["F(p)"] == [0.0] and rep.witness["F(q)"] == [-1.0]


def test_polyline_map():
    R = PiecewiseLinearMap(R_VERTICES)
    assert R(0.25) == (4.75,)
    assert R(1.0) == (4.5,)
    assert R.domain == (0.0, 3.5)
    with pytest.raises(MapDomainError):
        R(4.0)
    with pytest.raises(ValueError):
        PiecewiseLinearMap([(0, 0), (0, 1)])
    with pytest.raises(ValueError):
        PiecewiseLinearMap([(0, 0)])
    folded = PiecewiseLinearMap([(0, 0), (2, 1), (1, 2), (3, 3)])
    assert folded(1.5) == (0.75, 1.5, 2.25)


def test_composition_domain_error():
    inner = ClosedFormMap("u + 10", (0.0, 1.0))
    outer = PiecewiseLinearMap([(0, 0), (5, 5)])
    comp = ComposedMap(outer, inner)
    with pytest.raises(MapDomainError) as info:
        comp(0.5)
    assert "10.5" in str(info.value)
    ok = ComposedMap(outer, ClosedFormMap("2*u", (0.0, 1.0)))
    assert ok(0.5) == (1.0,)


def test_errors_for_unsupported_systems():
    planar = lookup("rotation")
    with pytest.raises(UnsupportedDimensionError):
        equilibria_at_input(planar, 0.0)
    flat = parse_system("system f\ndim 1\nstate_domain -inf..inf\nrhs1 = 0*x1\noutput = x1\n")
    with pytest.raises(DegenerateCharacteristicError):
        CharacteristicMap(flat)(0.0)


def test_cycles_by_order():
    cone = OrderCone((1, 1))
    assert check_no_cycles_by_order([(0, 0), (1, 1), (2, 3)], cone).certified
    v = check_no_cycles_by_order([(0, 1), (1, 0)], cone)
    assert not v.certified and v.verdict == "inconclusive"


def test_verify_characteristic_passes(sec5_z):
    rep = verify_characteristic(sec5_z, [3.0, 4.5, 6.0], np.linspace(0.0, 3.0, 7))
    assert rep.passed, rep.to_dict()
    d = rep.to_dict()
    assert d["evidence"] == "sampled" and len(d["per_input"]) == 3


def test_verify_characteristic_rejects_unstable_growth():
    s = parse_system("system g\ndim 1\nstate_domain -inf..inf\nrhs1 = x1 - u\noutput = x1\n")
    rep = verify_characteristic(s, [0.0], [-1.0, 0.5], t_final=20.0)
    assert rep.status == "fail"
    assert rep.conditions["condition2"].status == "fail"
    assert rep.conditions["condition2"].witnesses


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 8.0))
def test_k2_values_are_rhs_zeros(u):
    k2 = lookup("k2")
    vals = k2(u)
    assert 1 <= len(vals) <= 3
    assert all(abs(P(v) - u) < 1e-8 * max(1.0, u) for v in vals)
    assert list(vals) == sorted(vals)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 8.0), st.floats(0.0, 8.0))
def test_k2_order_preservation_pairs(a, b):
    k2 = lookup("k2")
    p, q = sorted((a, b))
    fp, fq = k2(p), k2(q)
    assert all(any(kq >= r - 1e-9 for r in fp) for kq in fq)
    assert all(any(r >= kp - 1e-9 for r in fq) for kp in fp)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-10, 10), max_size=20), st.floats(1e-9, 1e-3))
def test_dedupe_invariants(values, tol):
    out = dedupe(values, tol)
    assert list(out) == sorted(out)
    assert all(b - a > tol for a, b in zip(out, out[1:]))
    assert all(any(abs(v - o) <= tol * len(values) + 1e-15 for o in out) for v in values)
