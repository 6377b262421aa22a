"""Discrete inclusions ``w_{k+1} ∈ F(w_k)``: path enumeration, fixed points,
and asymptotic classification of solution sequences."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._parallel import pmap
from .charmap import DEDUP_TOL, MapDomainError, MultiMap, PiecewiseLinearMap, dedupe

CONV_TOL = 1e-9
MIN_RUN = 5
MAX_PERIOD = 8
ESCAPE_RADIUS = 1e6
BRANCH_CAP = 10_000


def make_zorro(epsilon: float = 0.0) -> PiecewiseLinearMap:
    """Three-segment folded map on ``[0, 1]``; ``epsilon > 0`` steepens the middle segment."""
    epsilon = float(epsilon)
    if not epsilon >= 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon!r}")
    if epsilon == 0:
        third = (0.25, 0.5)
    else:
        third = ((1 + 2 * epsilon) / (4 + 4 * epsilon), 0.5)
    return PiecewiseLinearMap([(0.0, 0.0), (0.5, 0.25), third, (1.0, 1.0)])


def successors(map: MultiMap, w: float, tol: float = DEDUP_TOL) -> tuple[float, ...]:
    return dedupe(map(w), tol)


# -- paths -------------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    kind: str  # converged | periodic | undetermined
    limit: float | None = None
    period: int | None = None
    orbit: tuple[float, ...] = ()
    note: str = ""

    @property
    def escaped(self) -> bool:
        return self.note.startswith("escaped")

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "converged":
            d["limit"] = self.limit
        if self.kind == "periodic":
            d["period"] = self.period
            d["orbit"] = list(self.orbit)
        if self.note:
            d["note"] = self.note
        return d


UNDETERMINED = Classification("undetermined")


@dataclass(frozen=True)
class InclusionPath:
    values: tuple[float, ...]
    branches: tuple[int, ...]  # branches[k] picks values[k+1] among sorted F(values[k])
    classification: Classification

    @property
    def start(self) -> float:
        return self.values[0]

    def replay(self, map: MultiMap, tol: float = DEDUP_TOL) -> bool:
        """Re-check ``w_{k+1} ∈ F(w_k)`` along the whole path."""
        for a, b in zip(self.values, self.values[1:]):
            if min(abs(v - b) for v in map(a)) > tol:
                return False
        return True

    def to_dict(self):
        return {"values": list(self.values), "branches": list(self.branches),
                "classification": self.classification.to_dict()}


def classify_values(values: Sequence[float], map: MultiMap | None = None, tol: float = CONV_TOL,
                    min_run: int = MIN_RUN, max_period: int = MAX_PERIOD) -> Classification:
    """Tail classification of a finite sequence.

    Converged: the last ``min_run`` increments are below ``tol`` and (given
    ``map``) the limit is a fixed point within ``10 tol``.  Periodic with the
    smallest ``p`` in ``2..max_period`` whose shift-by-``p`` differences stay
    below ``tol`` over the last two periods.
    """
    n = len(values)
    if n > min_run and all(abs(values[-1 - i] - values[-2 - i]) < tol for i in range(min_run)):
        lim = values[-1]
        if map is None or (map.contains(lim) and min(abs(v - lim) for v in map(lim)) < 10 * tol):
            return Classification("converged", limit=lim)
    for p in range(2, max_period + 1):
        if n < 3 * p:
            break
        if all(abs(values[-1 - i] - values[-1 - p - i]) < tol for i in range(2 * p)):
            orbit = tuple(values[n - p:])
            if max(orbit) - min(orbit) < tol:
                break  # a constant tail is convergence, not a cycle
            return Classification("periodic", period=p, orbit=orbit)
    return UNDETERMINED


@dataclass
class PathSet:
    start: float
    paths: list[InclusionPath]
    truncated: bool = False
    depth: int = 0

    def kinds(self) -> dict[str, int]:
        out = {"converged": 0, "periodic": 0, "undetermined": 0}
        for p in self.paths:
            out[p.classification.kind] += 1
        return out

    def limits(self, tol: float = 1e-7) -> list[float]:
        return list(dedupe((p.classification.limit for p in self.paths
                            if p.classification.kind == "converged"), tol))

    def periods(self) -> list[int]:
        return sorted({p.classification.period for p in self.paths
                       if p.classification.kind == "periodic"})

    @property
    def any_escaped(self) -> bool:
        return any(p.classification.escaped for p in self.paths)

    @property
    def all_converged(self) -> bool:
        return not self.truncated and all(p.classification.kind == "converged" for p in self.paths)

    def to_dict(self):
        return {"start": self.start, "depth": self.depth, "truncated": self.truncated,
                "counts": self.kinds(), "limits": self.limits(), "periods": self.periods(),
                "escaped": self.any_escaped}


def iterate_paths(map: MultiMap, w0: float, depth: int = 50, branch_cap: int = BRANCH_CAP,
                  tol: float = CONV_TOL, escape_radius: float = ESCAPE_RADIUS,
                  prune: bool = True, min_run: int = MIN_RUN,
                  max_period: int = MAX_PERIOD) -> PathSet:
    """Depth-first enumeration of every selection ``w_{k+1} ∈ F(w_k)`` from ``w0``.

    A path stops as soon as its prefix classifies (unless ``prune`` is off),
    when it reaches ``depth`` steps, leaves the map's domain, or exceeds
    ``escape_radius``.  If finished plus pending paths ever exceed
    ``branch_cap`` the enumeration stops and the set is flagged truncated.
    Paths come back sorted by their selection trace.
    """
    if depth < 1 or branch_cap < 1:
        raise ValueError("depth and branch_cap must be >= 1")
    cache: dict[float, tuple[float, ...]] = {}

    def succ(w):
        if w not in cache:
            cache[w] = map(w)
        return cache[w]

    done: list[InclusionPath] = []
    stack = [((float(w0),), ())]
    truncated = False
    while stack:
        if len(done) + len(stack) > branch_cap:
            truncated = True
            break
        vals, brs = stack.pop()
        w = vals[-1]
        if abs(w) > escape_radius:
            done.append(InclusionPath(vals, brs, Classification(
                "undetermined", note=f"escaped |w| > {escape_radius:g}")))
            continue
        if not map.contains(w):
            done.append(InclusionPath(vals, brs, Classification(
                "undetermined", note=f"left domain {list(map.domain)}")))
            continue
        if prune and len(vals) > 1:
            cls = classify_values(vals, None, tol, min_run, max_period)
            if cls.kind == "converged" and min(abs(v - w) for v in succ(w)) >= 10 * tol:
                cls = UNDETERMINED
            if cls.kind != "undetermined":
                done.append(InclusionPath(vals, brs, cls))
                continue
        if len(vals) > depth:
            cls = classify_values(vals, map, tol, min_run, max_period)
            done.append(InclusionPath(vals, brs, cls))
            continue
        nxt = succ(w)
        for i in reversed(range(len(nxt))):
            stack.append((vals + (nxt[i],), brs + (i,)))
    done.sort(key=lambda p: p.branches)
    return PathSet(float(w0), done, truncated, depth)


VERDICT_ORDER = ("periodic-found", "divergent-found", "truncated", "undetermined", "all-converge")


@dataclass
class GridSummary:
    verdict: str
    per_start: list[PathSet]
    depth: int
    tol: float
    escape_radius: float

    def limits(self, tol: float = 1e-7) -> list[float]:
        return list(dedupe((x for ps in self.per_start for x in ps.limits()), tol))

    def to_dict(self):
        return {"verdict": self.verdict, "depth": self.depth, "tol": self.tol,
                "divergence_rule": f"|w_k| > {self.escape_radius:g}",
                "limits": self.limits(),
                "starts": [ps.to_dict() for ps in self.per_start]}


def _verdict(sets: Sequence[PathSet]) -> str:
    if any(ps.periods() for ps in sets):
        return "periodic-found"
    if any(ps.any_escaped for ps in sets):
        return "divergent-found"
    if any(ps.truncated for ps in sets):
        return "truncated"
    if all(ps.all_converged for ps in sets):
        return "all-converge"
    return "undetermined"


def classify_grid(map: MultiMap, grid: Sequence[float], depth: int = 200, tol: float = CONV_TOL,
                  branch_cap: int = BRANCH_CAP, escape_radius: float = ESCAPE_RADIUS) -> GridSummary:
    """Run :func:`iterate_paths` from every start and aggregate a global verdict.

    Precedence: periodic-found, divergent-found, truncated, undetermined,
    all-converge (the last only when every path from every start converged).
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise ValueError("grid must be non-empty")
    sets = pmap(lambda w: iterate_paths(map, w, depth, branch_cap, tol, escape_radius), grid)
    return GridSummary(_verdict(sets), sets, depth, tol, escape_radius)


# -- fixed points ------------------------------------------------------------


def _fold(card, a, b, ca, tol=1e-12):
    while b - a > tol * (1.0 + abs(a)):
        m = 0.5 * (a + b)
        if card(m) == ca:
            a = m
        else:
            b = m
    return a, b


def find_fixed_points(map: MultiMap, lo: float, hi: float, grid: int = 401,
                      tol: float = CONV_TOL) -> list[float]:
    """All ``w`` in ``[lo, hi]`` with ``w ∈ F(w)`` up to ``tol``.

    Branches are the sorted values of ``F``; inside a cell of constant
    cardinality each branch residual ``F_i(w) - w`` is bracketed and
    bisected.  Cells where the cardinality changes are split at the jump
    (located by bisection), and both one-sided limits at the jump are tested.
    """
    if grid < 2:
        raise ValueError("grid must be >= 2")
    memo: dict[float, tuple[float, ...]] = {}

    def F(w):
        if w not in memo:
            memo[w] = map(w)
        return memo[w]

    def card(w):
        return len(F(w))

    found: list[float] = []

    def test(w):
        if min(abs(v - w) for v in F(w)) < tol:
            found.append(w)

    def bisect(i, a, b, ra):
        for _ in range(200):
            m = 0.5 * (a + b)
            if m <= a or m >= b:
                break
            fm = F(m)
            if len(fm) != card(a):
                cell(a, m)
                cell(m, b)
                return
            rm = fm[i] - m
            if rm == 0:
                a = b = m
                break
            if (rm > 0) == (ra > 0):
                a, ra = m, rm
            else:
                b = m
        for w in (a, b):
            test(w)

    def cell(a, b, level=0):
        ca, cb = card(a), card(b)
        if ca != cb:
            if level > 8:
                return
            j0, j1 = _fold(card, a, b, ca)
            test(j0)
            test(j1)
            if j0 > a:
                cell(a, j0, level + 1)
            if j1 < b:
                cell(j1, b, level + 1)
            return
        fa, fb = F(a), F(b)
        for i in range(ca):
            ra, rb = fa[i] - a, fb[i] - b
            if ra == 0 or rb == 0:
                continue  # nodes are tested directly
            if (ra > 0) != (rb > 0):
                bisect(i, a, b, ra)

    xs = np.linspace(lo, hi, grid)
    for x in xs:
        test(float(x))
    for a, b in zip(xs, xs[1:]):
        cell(float(a), float(b))
    out = []
    for w in sorted(found):
        if out and w - out[-1] <= DEDUP_TOL:
            # keep the better of two near-identical candidates
            if min(abs(v - w) for v in F(w)) < min(abs(v - out[-1]) for v in F(out[-1])):
                out[-1] = w
            continue
        out.append(w)
    return out


def membership_residual(map: MultiMap, w: float) -> float:
    return min(abs(v - w) for v in map(w))


# -- export ------------------------------------------------------------------


def paths_csv(sets: Sequence[PathSet]) -> str:
    """CSV ``start,step,value,branch,path``; ``branch`` is -1 on the start row."""
    rows = ["start,step,value,branch,path"]
    for ps in sets:
        for j, p in enumerate(ps.paths):
            for k, v in enumerate(p.values):
                b = p.branches[k - 1] if k else -1
                rows.append(f"{ps.start:.17g},{k},{v:.17g},{b},{j}")
    return "\n".join(rows) + "\n"


def cobweb_script(map: PiecewiseLinearMap, paths: Sequence[InclusionPath] = (),
                  title: str = "", labels: Sequence[str] = ()) -> str:
    """Gnuplot script drawing the polyline graph, the diagonal and optional cobwebs."""
    xs = [v[0] for v in map.vertices]
    ys = [v[1] for v in map.vertices]
    lo, hi = min(xs + ys), max(xs + ys)
    pad = 0.05 * (hi - lo or 1.0)
    out = [f'set title "{title}"', "set size square", "set key off",
           f"set xrange [{lo - pad:.6g}:{hi + pad:.6g}]",
           f"set yrange [{lo - pad:.6g}:{hi + pad:.6g}]",
           "$graph << EOD"]
    out += [f"{a:.17g} {b:.17g}" for a, b in map.vertices]
    out.append("EOD")
    for i, (a, b) in enumerate(map.vertices):
        text = labels[i] if i < len(labels) else ""
        if text:
            out.append(f'set label "{text}" at {a:.6g},{b:.6g} offset 0.5,0.5')
    plots = ["$graph with linespoints lw 2", "x with lines dt 2"]
    for j, p in enumerate(paths):
        out.append(f"$cobweb{j} << EOD")
        w = p.values
        out.append(f"{w[0]:.17g} {w[0]:.17g}")
        for a, b in zip(w, w[1:]):
            out.append(f"{a:.17g} {b:.17g}")
            out.append(f"{b:.17g} {b:.17g}")
        out.append("EOD")
        plots.append(f"$cobweb{j} with lines lw 1")
    out.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(out) + "\n"
