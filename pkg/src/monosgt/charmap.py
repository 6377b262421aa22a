"""Set-valued maps, static input-state characteristics and their order checks.

Every map here is a :class:`MultiMap`: calling it at a point of its domain
returns a sorted, deduplicated, non-empty tuple of floats.  Scalar-state
characteristics come from exhaustive root finding of ``f(x, u) = 0``;
piecewise-linear maps from slicing a polyline; compositions evaluate the
inner map first and union the outer images.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from ._parallel import pmap
from .dynsys.expr import Expression
from .dynsys.ode import IntegrationError
from .dynsys.simulate import integrate, omega_limit_estimate
from .dynsys.system import InputSignal, SystemDef
from .order import OrderCone, cone_leq, is_totally_ordered
from .roots import DegenerateRootError, scalar_roots

DEDUP_TOL = 1e-7
SEARCH_BOX = (-100.0, 100.0)


class MapDomainError(ValueError):
    """A point (or an inner image) lies outside a map's domain."""


class UnsupportedDimensionError(ValueError):
    pass


class DegenerateCharacteristicError(ValueError):
    """``f(., u)`` vanishes on an interval: equilibria are not isolated."""


def dedupe(values: Iterable[float], tol: float = DEDUP_TOL) -> tuple[float, ...]:
    out: list[float] = []
    for v in sorted(float(v) for v in values):
        if out and v - out[-1] <= tol:
            continue
        out.append(v)
    return tuple(out)


class MultiMap:
    """Base class: a set-valued map from an interval of reals to finite sets."""

    kind = "abstract"

    def __init__(self, domain: tuple[float, float], tol: float = DEDUP_TOL):
        lo, hi = float(domain[0]), float(domain[1])
        if not lo <= hi:
            raise ValueError(f"bad domain {domain!r}")
        self.domain = (lo, hi)
        self.tol = tol

    def contains(self, p: float) -> bool:
        lo, hi = self.domain
        slack = 1e-12 * (1.0 + abs(p))
        return lo - slack <= p <= hi + slack

    def __call__(self, p: float) -> tuple[float, ...]:
        p = float(p)
        if not math.isfinite(p) or not self.contains(p):
            raise MapDomainError(f"{p!r} is outside the domain {self.domain} of {self!r}")
        vals = dedupe(self._eval(min(max(p, self.domain[0]), self.domain[1])), self.tol)
        if not vals:
            raise MapDomainError(f"{self!r} has an empty image at {p!r}")
        return vals

    def _eval(self, p: float) -> Iterable[float]:  # pragma: no cover - abstract
        raise NotImplementedError


class CharacteristicMap(MultiMap):
    """``u -> k_x(u)`` (or ``h(k_x(u))`` with ``output=True``) of a scalar system."""

    kind = "characteristic"

    def __init__(self, sys: SystemDef, output: bool = False, search_box=SEARCH_BOX,
                 cells: int = 256, tol: float = DEDUP_TOL):
        super().__init__(sys.input_range, tol)
        self.sys = sys
        self.output = output
        self.search_box = search_box
        self.cells = cells

    def equilibria(self, u: float) -> list["EquilibriumPair"]:
        return equilibria_at_input(self.sys, u, self.search_box, self.cells)

    def _eval(self, u):
        eqs = self.equilibria(u)
        if self.output:
            return [self.sys.h(e.state) for e in eqs]
        return [e.state[0] for e in eqs]

    def __repr__(self):
        return f"CharacteristicMap({self.sys.name!r}, output={self.output})"


class PiecewiseLinearMap(MultiMap):
    """Map whose graph is the polyline through ``vertices`` (``(input, value)``).

    Segments may run backwards in the input, which is how the graph folds
    back over itself and becomes multi-valued.  Vertical segments are
    rejected since they would make the image an interval.
    """

    kind = "piecewise_linear"

    def __init__(self, vertices: Sequence[tuple[float, float]], tol: float = DEDUP_TOL):
        verts = tuple((float(a), float(b)) for a, b in vertices)
        if len(verts) < 2:
            raise ValueError("a polyline needs at least two vertices")
        for (a0, b0), (a1, b1) in zip(verts, verts[1:]):
            if (a0, b0) == (a1, b1):
                raise ValueError("consecutive vertices must differ")
            if a0 == a1:
                raise ValueError("vertical segments are not supported")
        xs = [v[0] for v in verts]
        super().__init__((min(xs), max(xs)), tol)
        self.vertices = verts

    def segments(self):
        return list(zip(self.vertices, self.vertices[1:]))

    def _eval(self, p):
        out = []
        for (a0, b0), (a1, b1) in self.segments():
            if min(a0, a1) <= p <= max(a0, a1):
                if p == a0:
                    out.append(b0)
                elif p == a1:
                    out.append(b1)
                else:
                    out.append(b0 + (p - a0) * (b1 - b0) / (a1 - a0))
        return out

    def __repr__(self):
        return f"PiecewiseLinearMap({list(self.vertices)!r})"


class ComposedMap(MultiMap):
    """``p -> union of outer(v) for v in inner(p)``."""

    kind = "composition"

    def __init__(self, outer: MultiMap, inner: MultiMap, tol: float | None = None):
        super().__init__(inner.domain, outer.tol if tol is None else tol)
        self.outer = outer
        self.inner = inner

    def _eval(self, p):
        out = []
        for v in self.inner(p):
            if not self.outer.contains(v):
                raise MapDomainError(
                    f"inner value {v!r} is outside the domain {self.outer.domain} of {self.outer!r}")
            out.extend(self.outer(v))
        return out

    def __repr__(self):
        return f"({self.outer!r} o {self.inner!r})"


class ClosedFormMap(MultiMap):
    """Singleton-valued map given by an expression in ``u``."""

    kind = "singleton_closed_form"

    def __init__(self, expr: Expression | str, domain=(-math.inf, math.inf),
                 tol: float = DEDUP_TOL):
        super().__init__(domain, tol)
        self.expr = Expression.parse(expr) if isinstance(expr, str) else expr

    def _eval(self, p):
        return [float(self.expr((), p))]

    def __repr__(self):
        return f"ClosedFormMap({str(self.expr)!r})"


def compose_maps(outer: MultiMap, inner: MultiMap) -> ComposedMap:
    return ComposedMap(outer, inner)


# -- equilibria --------------------------------------------------------------


@dataclass(frozen=True)
class EquilibriumPair:
    input: float
    state: tuple[float, ...]
    stability: str | None = None
    basin_note: str = ""

    def to_dict(self):
        return {"input": self.input, "state": list(self.state), "stability": self.stability,
                "basin": self.basin_note}


_BASIN = {
    "attracting": "open neighbourhood",
    "repelling": "singleton basin",
    "semi-stable-above": "attracts from above only",
    "semi-stable-below": "attracts from below only",
}


def _classify(g, x: float, gap: float) -> str:
    h = min(1e-6 * (1.0 + abs(x)), gap / 3)
    for _ in range(6):
        lo = float(g(np.array([x - h]))[0])
        hi = float(g(np.array([x + h]))[0])
        if lo != 0 and hi != 0:
            break
        h *= 4
    if lo > 0 and hi < 0:
        return "attracting"
    if lo < 0 and hi > 0:
        return "repelling"
    if lo < 0 and hi < 0:
        return "semi-stable-above"
    return "semi-stable-below"


def equilibria_at_input(sys: SystemDef, u: float, search_box=SEARCH_BOX,
                        cells: int = 256) -> list[EquilibriumPair]:
    """All equilibria of a scalar system at constant input ``u``, classified."""
    if sys.dimension != 1:
        raise UnsupportedDimensionError(
            "root finding needs a scalar state; use verify_characteristic for n > 1")
    (dlo, dhi), = sys.state_domain
    lo, hi = max(dlo, search_box[0]), min(dhi, search_box[1])
    rhs = sys.rhs[0]
    u = float(u)

    def g(z):
        return rhs((z,), u)

    try:
        roots = scalar_roots(g, lo, hi, cells=cells)
    except DegenerateRootError as exc:
        raise DegenerateCharacteristicError(f"{sys.name} at u={u}: {exc}") from None
    xs = [r.x for r in roots]
    out = []
    for k, r in enumerate(roots):
        gaps = [abs(r.x - xs[j]) for j in (k - 1, k + 1) if 0 <= j < len(xs)]
        stab = _classify(g, r.x, min(gaps, default=1.0))
        out.append(EquilibriumPair(u, (r.x,), stab, _BASIN[stab]))
    return out


# -- branch structure --------------------------------------------------------


@dataclass
class Profile:
    intervals: list[tuple[float, float, int]]
    folds: list[float]

    def to_dict(self):
        return {"intervals": [list(iv) for iv in self.intervals], "folds": list(self.folds)}

    def proper_intervals(self, min_width: float = 1e-6):
        return [iv for iv in self.intervals if iv[1] - iv[0] > min_width]


def _locate_jump(count: Callable[[float], int], a: float, b: float, ca: int, tol: float) -> float:
    while b - a > tol:
        m = 0.5 * (a + b)
        if count(m) == ca:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def cardinality_profile(map: MultiMap, u_lo: float, u_hi: float, grid: int = 601,
                        fold_tol: float = 1e-9, merge_tol: float = 1e-6) -> Profile:
    """Constant-cardinality intervals of ``map`` on ``[u_lo, u_hi]`` and its fold points."""
    if grid < 2:
        raise ValueError("grid must have at least two points")
    count = lambda p: len(map(p))  # noqa: E731
    xs = np.linspace(u_lo, u_hi, grid)
    cs = pmap(count, xs)
    intervals = []
    jumps = []
    start = float(xs[0])
    for i in range(grid - 1):
        if cs[i + 1] != cs[i]:
            j = _locate_jump(count, float(xs[i]), float(xs[i + 1]), cs[i], fold_tol)
            intervals.append((start, j, cs[i]))
            jumps.append(j)
            start = j
    intervals.append((start, float(xs[-1]), cs[-1]))
    folds: list[list[float]] = []
    for j in jumps:
        if folds and j - folds[-1][-1] <= merge_tol:
            folds[-1].append(j)
        else:
            folds.append([j])
    return Profile(intervals, [float(np.mean(c)) for c in folds])


def sample_branches(map: MultiMap, lo: float, hi: float, n: int = 201) -> list[tuple[float, int, float]]:
    """Rows ``(u, branch_index, value)`` for plotting the graph of ``map``."""
    rows = []
    for u, vals in zip(np.linspace(lo, hi, n), pmap(map, np.linspace(lo, hi, n))):
        rows.extend((float(u), k, v) for k, v in enumerate(vals))
    return rows


def local_bound(map: MultiMap, lo: float, hi: float, grid: int = 101, rel: float = 0.05):
    """Grid supremum of ``|map|`` and its stability under one grid refinement."""
    def sup(n):
        return max(max(abs(v) for v in map(p)) for p in np.linspace(lo, hi, n))

    coarse, fine = sup(grid), sup(2 * grid - 1)
    finite = math.isfinite(coarse) and math.isfinite(fine)
    stable = finite and abs(fine - coarse) <= rel * max(1.0, abs(fine))
    return {"sup": fine, "sup_coarse": coarse, "finite": finite, "stable": stable,
            "grid": grid, "interval": [lo, hi]}


# -- order properties --------------------------------------------------------


@dataclass
class PropertyReport:
    passed: bool
    checked: int
    witness: dict | None = None

    def __bool__(self):
        return self.passed

    def to_dict(self):
        return {"pass": self.passed, "checked": self.checked, "witness": self.witness}


def check_weakly_nondecreasing(map: MultiMap, grid: Sequence[float],
                               cone_in: OrderCone = OrderCone((1,)),
                               cone_out: OrderCone = OrderCone((1,)),
                               tol: float = 1e-9) -> PropertyReport:
    """Set-valued order preservation on every ordered pair of grid points.

    For ``p ⪯ q`` each ``k_q ∈ F(q)`` needs some ``r_p ∈ F(p)`` below it and
    each ``k_p ∈ F(p)`` some ``r_q ∈ F(q)`` above it (orders of ``cone_out``,
    widened by ``tol``).
    """
    pts = [float(p) for p in grid]
    vals = pmap(map, pts)
    so = cone_out.signs[0]
    checked = 0
    for i, p in enumerate(pts):
        for j, q in enumerate(pts):
            if i == j or not cone_leq(cone_in, p, q):
                continue
            checked += 1
            fp, fq = vals[i], vals[j]
            for kq in fq:
                if not any(so * (kq - rp) >= -tol for rp in fp):
                    return PropertyReport(False, checked, {"p": p, "q": q, "k_q": kq,
                                                           "F(p)": list(fp), "F(q)": list(fq)})
            for kp in fp:
                if not any(so * (rq - kp) >= -tol for rq in fq):
                    return PropertyReport(False, checked, {"p": p, "q": q, "k_p": kp,
                                                           "F(p)": list(fp), "F(q)": list(fq)})
    return PropertyReport(True, checked)


def check_antimonotone(map: MultiMap, grid: Sequence[float], tol: float = 1e-9,
                       sense: str = "opposite") -> PropertyReport:
    """For every ``p != q`` and ``k_p ∈ F(p)`` look for ``k_q ∈ F(q)`` with
    ``(k_p - k_q)(p - q) <= 0`` (``sense="opposite"``) or ``>= 0``
    (``sense="same"``)."""
    if sense not in ("opposite", "same"):
        raise ValueError("sense must be 'opposite' or 'same'")
    sgn = 1.0 if sense == "opposite" else -1.0
    pts = [float(p) for p in grid]
    vals = pmap(map, pts)
    checked = 0
    for i, p in enumerate(pts):
        for j, q in enumerate(pts):
            if i == j:
                continue
            checked += 1
            for kp in vals[i]:
                if not any(sgn * (kp - kq) * (p - q) <= tol for kq in vals[j]):
                    return PropertyReport(False, checked, {"p": p, "q": q, "k_p": kp,
                                                           "F(q)": list(vals[j]), "sense": sense})
    return PropertyReport(True, checked)


@dataclass(frozen=True)
class CycleVerdict:
    verdict: str  # "no-cycles-certified" | "inconclusive"
    provenance: str

    @property
    def certified(self) -> bool:
        return self.verdict == "no-cycles-certified"


def check_no_cycles_by_order(equilibria, cone: OrderCone) -> CycleVerdict:
    """Certify absence of cycles among equilibria that are totally ordered by ≺≺.

    Valid only for a monotone system; that premise is the caller's and is
    recorded in the provenance string.  Anything else is inconclusive.
    """
    pts = [np.atleast_1d(np.asarray(e, dtype=float)) for e in equilibria]
    if is_totally_ordered(cone, pts):
        return CycleVerdict("no-cycles-certified",
                            "equilibria totally ordered by strict cone order; assumes monotone flow")
    return CycleVerdict("inconclusive", "equilibria not totally ordered; no cycle test applied")


# -- characteristic verification --------------------------------------------


@dataclass
class ConditionResult:
    status: str = "pass"  # pass | fail | inconclusive
    witnesses: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def fail(self, witness):
        self.status = "fail"
        self.witnesses.append(witness)

    def inconclusive(self, note):
        if self.status == "pass":
            self.status = "inconclusive"
        self.notes.append(note)

    def to_dict(self):
        return {"status": self.status, "witnesses": self.witnesses, "notes": self.notes}


@dataclass
class CharacteristicReport:
    system: str
    conditions: dict[str, ConditionResult]
    per_input: list[dict]
    budget: dict

    @property
    def status(self) -> str:
        st = [c.status for c in self.conditions.values()]
        if "fail" in st:
            return "fail"
        return "inconclusive" if "inconclusive" in st else "pass"

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self):
        return {"system": self.system, "status": self.status,
                "conditions": {k: v.to_dict() for k, v in self.conditions.items()},
                "per_input": self.per_input, "budget": self.budget,
                "evidence": "sampled"}


def _in_domain(sys: SystemDef, x) -> bool:
    return bool(np.all(x >= sys.lower) and np.all(x <= sys.upper))


def _cluster(points, radius):
    centers: list[np.ndarray] = []
    for p in points:
        if not any(np.max(np.abs(p - c)) <= radius for c in centers):
            centers.append(p)
    centers.sort(key=lambda c: tuple(c))
    return centers


def verify_characteristic(sys: SystemDef, u_grid: Sequence[float], x0_grid: Sequence,
                          t_final: float = 150.0, tol: float = 5e-3,
                          eps_schedule=(0.1, 0.05, 0.01), max_halvings: int = 6,
                          rel_tol: float = 1e-8, abs_tol: float = 1e-10) -> CharacteristicReport:
    """Sampled check of the four defining properties of an i/s characteristic.

    1. equilibria are exactly the computed characteristic values;
    2. every sampled start settles within ``tol`` of one of them;
    3. static Lyapunov stability inside each empirical basin for each
       ``ε`` in ``eps_schedule`` (a ``δ`` is searched by halving);
    4. equilibria are isolated (pairwise distance > 10 tol) and carry no
       cycles (automatic for scalar states, order certificate otherwise).
    """
    conds = {f"condition{i}": ConditionResult() for i in range(1, 5)}
    conds["condition3"].notes.append("sampled evidence")
    n = sys.dimension
    per_input = []
    starts = [np.atleast_1d(np.asarray(x, dtype=float)) for x in x0_grid]

    def settle(args):
        x0, u = args
        try:
            return omega_limit_estimate(sys, x0, u, t_final, tol, rel_tol, abs_tol)
        except IntegrationError as exc:
            return exc

    for u in map(float, u_grid):
        record = {"u": u}
        runs = pmap(settle, [(x0, u) for x0 in starts])
        if n == 1:
            eqs = [np.array(e.state) for e in equilibria_at_input(sys, u)]
            record["equilibria"] = [e.to_dict() for e in equilibria_at_input(sys, u)]
        else:
            eqs = _cluster([r.point for r in runs if not isinstance(r, Exception) and r.settled], tol)
            record["equilibria"] = [{"state": e.tolist()} for e in eqs]
            conds["condition1"].notes.append("n > 1: equilibria estimated by clustering limits")
        for e in eqs:
            res = float(np.max(np.abs(sys.f(e, u))))
            if res >= tol:
                conds["condition1"].fail({"u": u, "state": e.tolist(), "residual": res})
        if not eqs:
            conds["condition1"].fail({"u": u, "reason": "no equilibrium found"})

        # condition 2: coverage
        for x0, r in zip(starts, runs):
            if isinstance(r, Exception):
                conds["condition2"].fail({"u": u, "x0": x0.tolist(), "reason": str(r)})
                continue
            if not r.settled:
                conds["condition2"].fail({"u": u, "x0": x0.tolist(), "reason": "not settled",
                                          "terminal": r.point.tolist(), "drift": r.drift,
                                          "residual": r.residual})
                continue
            d = min((float(np.max(np.abs(r.point - e))) for e in eqs), default=math.inf)
            if d >= tol:
                conds["condition2"].fail({"u": u, "x0": x0.tolist(), "terminal": r.point.tolist(),
                                          "distance": d})

        # condition 3: static Lyapunov stability, sampled
        deltas = {}
        if n == 1:
            dirs = [np.array([-1.0]), np.array([1.0])]
        else:
            eye = np.eye(n)
            dirs = [s * eye[i] for i in range(n) for s in (-1.0, 1.0)]
            dirs += [np.full(n, s / math.sqrt(n)) for s in (-1.0, 1.0)]
        for e in eqs:
            cache = {}

            def excursions(delta, e=e, cache=cache):
                if delta not in cache:
                    out = []
                    for d in dirs:
                        x0 = e + delta * d
                        if not _in_domain(sys, x0):
                            continue
                        try:
                            tr = integrate(sys, x0, InputSignal.constant(u), t_final,
                                           rel_tol, abs_tol)
                        except IntegrationError:
                            continue
                        if np.max(np.abs(tr.final_state - e)) < tol:
                            out.append((x0, float(np.max(np.abs(tr.states - e)))))
                    cache[delta] = out
                return cache[delta]

            found = {}
            for eps in eps_schedule:
                delta = eps / 2
                for _ in range(max_halvings + 1):
                    bad = [(x0, ex) for x0, ex in excursions(delta) if ex > eps]
                    if not bad:
                        found[eps] = delta
                        break
                    delta /= 2
                else:
                    conds["condition3"].fail({"u": u, "equilibrium": e.tolist(), "epsilon": eps,
                                              "x0": bad[0][0].tolist(), "excursion": bad[0][1]})
            deltas[tuple(e.tolist())] = found
        record["lyapunov_deltas"] = [{"equilibrium": list(k), "delta": {str(a): b for a, b in v.items()}}
                                     for k, v in deltas.items()]

        # condition 4: isolation and cycles
        for a in range(len(eqs)):
            for b in range(a + 1, len(eqs)):
                dist = float(np.max(np.abs(eqs[a] - eqs[b])))
                if dist <= 10 * tol:
                    conds["condition4"].fail({"u": u, "pair": [eqs[a].tolist(), eqs[b].tolist()],
                                              "distance": dist})
        if n == 1:
            record["cycles"] = "scalar: no cycles"
        else:
            verdict = check_no_cycles_by_order(eqs, sys.state_cone)
            record["cycles"] = verdict.verdict
            if not verdict.certified:
                conds["condition4"].inconclusive(f"u={u}: {verdict.provenance}")
        per_input.append(record)

    budget = {"u_grid": list(map(float, u_grid)), "x0_count": len(starts), "t_final": t_final,
              "tol": tol, "eps_schedule": list(eps_schedule)}
    return CharacteristicReport(sys.name, conds, per_input, budget)
