"""Acceptance criteria 1-10, each at its stated tolerance and time budget.

Every test records one PASS/FAIL line; the lines are printed in the pytest
terminal summary, and also when this file is run directly as a script.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from oracles import CONTRACTION_BOUND, MULTI_ROOTS, W_BAR, X_BAR, cubic_roots

from monosgt.charmap import (ClosedFormMap, cardinality_profile, check_antimonotone,
                             check_weakly_nondecreasing, equilibria_at_input)
from monosgt.dynsys import check_monotone_sampled, integrate, parse_system
from monosgt.inclusion import classify_grid, find_fixed_points, iterate_paths, membership_residual
from monosgt.order import OrderCone, cone_leq
from monosgt.smallgain import (attractive_set, image_convergence, lookup, loop_equilibria,
                               validate_convergence, verify_hypotheses)


class Criterion:
    def __init__(self, number, title, budget):
        self.number, self.title, self.budget = number, title, budget
        self.details = []

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def check(self, ok, detail):
        self.details.append((bool(ok), detail))

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        ok = exc_type is None and all(o for o, _ in self.details)
        if self.budget is not None:
            ok = ok and elapsed < self.budget
        bad = [d for o, d in self.details if not o]
        if exc_type is not None:
            bad.append(f"{exc_type.__name__}: {exc}")
        budget = f" < {self.budget:g} s" if self.budget is not None else ""
        line = (f"criterion {self.number:>2} {'PASS' if ok else 'FAIL'}  {self.title}  "
                f"[{elapsed:.2f} s{budget}]")
        if bad:
            line += "  " + "; ".join(bad)
        ACCEPTANCE[self.number] = line
        print(line)
        if exc_type is None:
            assert ok, line
        return False


_SEC5_GRID = None


def _sec5_runs():
    global _SEC5_GRID
    if _SEC5_GRID is None:
        ic = lookup("sec5-original")
        t0 = time.perf_counter()
        pairs = attractive_set(ic, loop_equilibria(ic))
        rep = validate_convergence(ic, ic.start_grid((5, 5)), 60.0, 1e-3, pairs)
        _SEC5_GRID = (ic, pairs, rep, time.perf_counter() - t0)
    return _SEC5_GRID


def test_criterion_1_characteristic_values(sec5_z):
    with Criterion(1, "k2(4) = {1/2, 2}, k2(5) = {1, 5/2} within 1e-9", 0.1) as c:
        for u, expect in ((4.0, (0.5, 2.0)), (5.0, (1.0, 2.5))):
            got = [e.state[0] for e in equilibria_at_input(sec5_z, u)]
            c.check(len(got) == 2 and max(abs(a - b) for a, b in zip(got, expect)) < 1e-9,
                    f"u={u}: {got}")


def test_criterion_2_branch_structure(k2):
    with Criterion(2, "k2 on [0,6]: 1 / 3 / 1 branches, folds at 4 and 5", 1.0) as c:
        prof = cardinality_profile(k2, 0.0, 6.0, 601)
        proper = prof.proper_intervals()
        c.check([iv[2] for iv in proper] == [1, 3, 1], f"counts {proper}")
        c.check(proper[0][0] == 0.0 and proper[-1][1] == 6.0, "interval ends")
        c.check(len(prof.folds) == 2 and abs(prof.folds[0] - 4) < 1e-6
                and abs(prof.folds[1] - 5) < 1e-6, f"folds {prof.folds}")


def test_criterion_3_contraction(loop_map):
    with Criterion(3, "sup |difference quotient| of k2 o k1 on [2.5, 50] <= 160/7569", 1.0) as c:
        ws = np.linspace(2.5, 50.0, 951)
        vals = np.array([loop_map(w)[0] for w in ws])
        sup = float(np.max(np.abs(np.diff(vals) / np.diff(ws))))
        c.check(sup < 1.0 and sup <= CONTRACTION_BOUND + 1e-6,
                f"sup {sup:.6g} vs bound {CONTRACTION_BOUND:.6g}")


def test_criterion_4_unique_fixed_point(loop_map):
    with Criterion(4, "E(k2 o k1) on [2.5, 8] = {w_bar}, matches bisection oracle", 0.5) as c:
        pts = find_fixed_points(loop_map, 2.5, 8.0)
        c.check(len(pts) == 1, f"fixed points {pts}")
        c.check(membership_residual(loop_map, pts[0]) < 1e-9, "membership residual")
        c.check(abs(pts[0] - W_BAR) < 1e-8, f"{pts[0]!r} vs oracle {W_BAR!r}")


def test_criterion_5_closed_loop_convergence():
    with Criterion(5, "sec5-original 5x5 grid, t=60: terminal distance < 1e-3", 10.0) as c:
        ic, pairs, rep, _ = _sec5_runs()
        c.check(len(pairs) == 1 and abs(pairs[0].x[0] - X_BAR) < 1e-8, f"x_bar {pairs[0].x}")
        c.check(len(pairs[0].z_set) == 1 and abs(pairs[0].z_set[0][0] - W_BAR) < 1e-8,
                f"z_bar {pairs[0].z_set}")
        c.check(rep.passed and len(rep.runs) == 25,
                f"max distance {max(r['distance'] for r in rep.runs):.3g}")


def test_criterion_6_boundedness_claim():
    with Criterion(6, "max_t |x(t)| <= |x(0)| + 6 + 1e-6 on every criterion-5 run", None) as c:
        _, _, rep, _ = _sec5_runs()
        worst = max(r["max_abs_x"] - (abs(r["start"][0]) + 6) for r in rep.runs)
        c.check(worst <= 1e-6, f"worst margin {worst:.3g}")


def test_criterion_7_zorro_dynamics():
    with Criterion(7, "Zorro(0) period 2 on [0.25,0.5]; Zorro(1.5) all converge, E = {0,3/7,1}",
                   2.0) as c:
        grid = np.linspace(0.0, 1.0, 11)
        s0 = classify_grid(lookup("zorro"), grid)
        c.check(s0.verdict == "periodic-found", s0.verdict)
        for ps in s0.per_start:
            inside = 0.25 <= ps.start <= 0.5
            c.check((ps.periods() == [2]) if inside else not ps.periods(),
                    f"start {ps.start}: periods {ps.periods()}")
        f15 = lookup("zorro-eps(1.5)")
        s1 = classify_grid(f15, grid)
        c.check(s1.verdict == "all-converge", s1.verdict)
        fps = find_fixed_points(f15, 0.0, 1.0)
        c.check(len(fps) == 3 and max(abs(a - b) for a, b in zip(fps, (0, 3 / 7, 1))) < 1e-9,
                f"fixed points {fps}")


def test_criterion_8_multiequil():
    with Criterion(8, "multiequil: 3 loop equilibria; k_y images reach 4.5 by step 4", 5.0) as c:
        ic = lookup("multiequil")
        eqs = loop_equilibria(ic)
        oracle = cubic_roots(4.5)
        c.check(len(eqs) == 3, f"equilibria {eqs}")
        c.check(max(abs(a - b) for a, b in zip(eqs, oracle)) < 1e-9, f"{eqs} vs {oracle}")
        c.check(max(abs(a - b) for a, b in zip(eqs, MULTI_ROOTS)) < 1e-9, "closed form")
        k_y = ic.k_y()
        loop = ic.loop_w()
        images = {}
        worst, paths = 0.0, 0
        for w0 in np.linspace(0.0, 5.0, 11):
            ps = iterate_paths(loop, w0, depth=8, prune=False)
            c.check(not ps.truncated, f"truncated from {w0}")
            for p in ps.paths:
                paths += 1
                for w in p.values[4:]:
                    if w not in images:
                        images[w] = k_y(w)
                    worst = max(worst, max(abs(v - 4.5) for v in images[w]))
        c.check(worst < 1e-9, f"worst |k_y(w_k) - 4.5| for k >= 4: {worst:.3g} over {paths} paths")


def test_criterion_9_property_suites(k2):
    with Criterion(9, "order axioms, k2 weakly non-decreasing, antimonotone k_w, RK order, path replay",
                   10.0) as c:
        rng = np.random.default_rng(9)
        for dim in (1, 2, 3):
            cone = OrderCone(tuple(rng.choice([-1, 1], dim)))
            for _ in range(1000 // 3 + 1):
                a, b, d = (rng.integers(-3, 4, dim).astype(float) for _ in range(3))
                c.check(cone_leq(cone, a, a), "reflexive")
                if cone_leq(cone, a, b) and cone_leq(cone, b, a):
                    c.check(np.array_equal(a, b), "antisymmetric")
                if cone_leq(cone, a, b) and cone_leq(cone, b, d):
                    c.check(cone_leq(cone, a, d), "transitive")
        grid = np.linspace(0.0, 6.0, 61)
        c.check(check_weakly_nondecreasing(k2, grid).passed, "k2 weakly non-decreasing")
        k_w = lookup("sec5-original").k_w()
        c.check(check_antimonotone(k_w, grid).passed, "k_w antimonotone")
        decay = parse_system("system d\ndim 1\nstate_domain -inf..inf\nrhs1 = -x1\noutput = x1\n")
        errs = []
        for rtol in (1e-6, 1e-8, 1e-10):
            tr = integrate(decay, [1.0], 0.0, 1.0, rtol, rtol * 1e-2)
            errs.append(abs(tr.final_state[0] - math.exp(-1)))
        c.check(errs[2] < errs[1] < errs[0] and errs[1] < 10 * 1e-8, f"rk errors {errs}")
        for name, w0 in (("zorro", 0.3), ("zorro-eps(1.5)", 0.45), ("k2-k1", 5.0)):
            m = lookup(name)
            ps = iterate_paths(m, w0, 40)
            c.check(all(p.replay(m) for p in ps.paths), f"replay {name}")


def test_criterion_10_negative_controls():
    with Criterion(10, "rotation not monotone; miswired loop fails condition 2; {-x} fails", 2.0) as c:
        rot = check_monotone_sampled(lookup("rotation"), sample_count=20, t_final=10.0, seed=0)
        c.check(not rot.passed and rot.witness is not None, "rotation witness")
        rep = verify_hypotheses(lookup("sec5-miswired"), fail_fast=True)
        c.check(rep.condition2["status"] == "fail" and rep.verdict == "fail",
                f"condition2 {rep.condition2['status']}")
        c.check(rep.condition2["monotone"]["witness"] is not None, "orientation witness")
        neg = check_weakly_nondecreasing(ClosedFormMap("-u", (0.0, 1.0)), [0.0, 1.0])
        c.check(not neg.passed and neg.witness["p"] == 0.0 and neg.witness["q"] == 1.0,
                f"witness {neg.witness}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
