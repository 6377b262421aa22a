"""Bracketing root finder for scalar functions, vectorized over a grid.

Sign changes on a uniform grid give brackets; grid nodes where ``|g|``
has a sign-change-free local minimum are refined (they may hide a pair of
close roots or a tangency), and at the last refinement level the minimum
is polished to decide between "two roots", "double root" and "nothing".
Every bracket is then polished by Brent's method.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq


class DegenerateRootError(ValueError):
    """The function vanishes on a whole subinterval."""


@dataclass(frozen=True)
class Root:
    x: float
    double: bool = False


def _eval(g, x):
    r = g(x)
    if np.ndim(r) == 0:
        return np.full_like(x, float(r))
    return r


def _stationary(g, lo, hi, h):
    """Bisect the sign of a central-difference slope on ``[lo, hi]``.

    Locating a tangency through ``g'`` instead of ``|g|`` keeps it accurate
    to far better than ``sqrt(eps)``.
    """
    def slope(x):
        return float(_eval(g, np.array([x + h]))[0] - _eval(g, np.array([x - h]))[0])

    sa = np.sign(slope(lo))
    sb = np.sign(slope(hi))
    if sa == 0 or sb == 0 or sa == sb:
        xs = np.linspace(lo, hi, 65)
        return float(xs[np.argmin(np.abs(_eval(g, xs)))])
    for _ in range(80):
        m = 0.5 * (lo + hi)
        if hi - lo <= 1e-15 * (1.0 + abs(m)):
            break
        sm = np.sign(slope(m))
        if sm == 0:
            return m
        if sm == sa:
            lo = m
        else:
            hi = m
    return 0.5 * (lo + hi)


def _scan(g, xs, rounds, sub, ftol, brackets, found):
    fs = _eval(g, xs)
    s = np.sign(fs)
    run = np.flatnonzero((s[:-2] == 0) & (s[1:-1] == 0) & (s[2:] == 0))
    if len(run):
        raise DegenerateRootError(f"function vanishes identically near x={xs[run[0]]:.6g}")
    for i in np.flatnonzero(s == 0):
        found.append(Root(float(xs[i])))
    for i in np.flatnonzero(s[:-1] * s[1:] < 0):
        brackets.append((xs[i], xs[i + 1], fs[i]))
    a = np.abs(fs)
    mid = slice(1, -1)
    cand = ((s[mid] != 0) & (s[:-2] == s[mid]) & (s[2:] == s[mid])
            & (a[mid] <= a[:-2]) & (a[mid] <= a[2:]))
    for i in np.flatnonzero(cand) + 1:
        lo, hi = xs[i - 1], xs[i + 1]
        if rounds > 0:
            _scan(g, np.linspace(lo, hi, 2 * sub + 1), rounds - 1, sub, ftol, brackets, found)
            continue
        # quadratic through the three nodes; a vertex far from zero cannot hide a root
        f0, f1, f2 = fs[i - 1], fs[i], fs[i + 1]
        curv = f0 - 2 * f1 + f2
        if curv != 0:
            vertex = f1 - (f2 - f0) ** 2 / (8 * curv)
            if np.sign(vertex) == s[i] and abs(vertex) > 1e-6 + ftol + 1e-3 * abs(f1):
                continue
        xm = _stationary(g, lo, hi, 2e-6 * (1.0 + abs(xs[i])))
        fm = float(_eval(g, np.array([xm]))[0])
        if abs(fm) <= ftol:
            found.append(Root(float(xm), double=True))
        elif np.sign(fm) != s[i]:
            brackets.append((lo, xm, fs[i - 1]))
            brackets.append((xm, hi, fm))


def _polish(g, brackets, xtol):
    """Brent's method on every bracket, with a pole filter."""
    out = []
    for a, b, _ in brackets:
        a, b = float(a), float(b)
        fa0 = abs(float(g(a)))
        fb0 = abs(float(g(b)))
        x = brentq(lambda t: float(g(t)), a, b, xtol=xtol * (1.0 + abs(a)), rtol=4 * np.finfo(float).eps)
        # a sign change across a pole shows growing |g| as the bracket shrinks
        if abs(float(g(x))) <= max(fa0, fb0):
            out.append(Root(x))
    return out


def scalar_roots(
    g: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    cells: int = 256,
    rounds: int = 2,
    sub: int = 16,
    xtol: float = 1e-14,
    ftol: float = 1e-10,
    merge_tol: float = 1e-7,
) -> list[Root]:
    """All roots of ``g`` in ``[lo, hi]`` (``g`` must accept numpy arrays)."""
    if not hi > lo:
        raise ValueError("empty search interval")
    brackets: list = []
    found: list[Root] = []
    _scan(g, np.linspace(lo, hi, cells + 1), rounds, sub, ftol, brackets, found)
    found.extend(_polish(g, brackets, xtol))
    found.sort(key=lambda r: r.x)
    merged: list[Root] = []
    for r in found:
        if merged and r.x - merged[-1].x <= merge_tol:
            prev = merged[-1]
            # two numerically split halves of a tangency collapse to one double root
            x = prev.x if abs(float(g(np.array([prev.x]))[0])) <= abs(float(g(np.array([r.x]))[0])) else r.x
            merged[-1] = Root(x, double=True)
        else:
            merged.append(r)
    return merged
