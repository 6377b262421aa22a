"""Adaptive Dormand-Prince 5(4) integrator with domain projection.

Fifth-order propagation (local extrapolation), embedded fourth-order error
estimate, FSAL, PI-free standard step controller with rejection.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np


class IntegrationError(RuntimeError):
    """Step size underflow or a non-finite state; ``t`` is the last time reached."""

    def __init__(self, message: str, t: float, state=None):
        self.t = t
        self.state = state
        super().__init__(f"{message} at t={t:.17g}")


class InvarianceError(IntegrationError):
    """The state left its domain by more than the absolute tolerance."""


# Butcher tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_A_ROWS = [np.array(r) for r in _A]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


def _hermite(t0, y0, f0, t1, y1, f1, t):
    h = t1 - t0
    s = (t - t0) / h
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def _initial_step(fun, t0, y0, f0, rtol, atol, span):
    scale = atol + rtol * np.abs(y0)
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + h0 * f0
    f1 = fun(t0 + h0, y1)
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    # a state tiny next to atol can push 100*h0 below the underflow limit;
    # start a bit above it and let the controller reject if that is too big
    floor = 1e3 * 16 * np.finfo(float).eps * max(1.0, abs(t0))
    return min(max(min(100 * h0, h1), floor), span)


def _segment(fun, t0, t1, y0, rtol, atol, lower, upper, max_stride, out_t, out_y, max_steps):
    t = t0
    y = np.array(y0, dtype=float)
    f = np.asarray(fun(t, y), dtype=float)
    span = t1 - t0
    h = _initial_step(fun, t, y, f, rtol, atol, span)
    steps = 0
    k = np.empty((7, y.size))
    while t < t1:
        if steps >= max_steps:
            raise IntegrationError("step budget exhausted", t, y)
        h_min = 16 * np.finfo(float).eps * max(1.0, abs(t))
        if h < h_min:
            raise IntegrationError("step size underflow", t, y)
        last = t + h >= t1 - h_min
        if last:
            h = t1 - t
        k[0] = f
        for s in range(1, 7):
            ys = y + h * (_A_ROWS[s] @ k[:s])
            k[s] = fun(t + _C[s] * h, ys)
        y_new = y + h * (_B5 @ k)
        f_new = k[6]
        if not (np.isfinite(y_new).all() and np.isfinite(f_new).all()):
            h *= _MIN_FACTOR
            steps += 1
            continue
        err_vec = h * (_E @ k)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float((np.abs(err_vec) / scale).max())
        if err > 1.0:
            h *= max(_MIN_FACTOR, _SAFETY * err ** (-1 / 5))
            steps += 1
            continue
        t_new = t1 if last else t + h
        if lower is not None:
            if (y_new < lower - atol).any() or (y_new > upper + atol).any():
                raise InvarianceError("state left its domain", t_new, y_new)
            y_new = np.clip(y_new, lower, upper)
        if max_stride is not None:
            jump = float(np.max(np.abs(y_new - y)))
            pieces = int(math.ceil(jump / max_stride)) if jump > 0 else 1
            for j in range(1, pieces):
                tj = t + (t_new - t) * j / pieces
                out_t.append(tj)
                out_y.append(_hermite(t, y, f, t_new, y_new, f_new, tj))
        out_t.append(t_new)
        out_y.append(y_new.copy())
        t, y, f = t_new, y_new, f_new
        factor = _MAX_FACTOR if err == 0 else min(_MAX_FACTOR, _SAFETY * err ** (-1 / 5))
        h *= max(_MIN_FACTOR, factor)
        steps += 1
    return y


def solve(
    fun: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    t1: float,
    y0: Sequence[float],
    rtol: float = 1e-8,
    atol: float = 1e-10,
    breakpoints: Sequence[float] = (),
    lower=None,
    upper=None,
    max_stride: float | None = None,
    max_steps: int = 200_000,
):
    """Integrate ``dy/dt = fun(t, y)`` from ``t0`` to ``t1``.

    The run restarts (fresh step size, fresh FSAL stage) at every breakpoint,
    so discontinuous inputs never straddle a step.  ``lower``/``upper`` bound
    the state: excursions within ``atol`` are projected back, larger ones
    raise :class:`InvarianceError`.

    Returns ``(times, states)`` with ``states[i]`` the state at ``times[i]``.
    """
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    if not t1 > t0:
        raise ValueError("t_final must exceed the initial time")
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    if lower is not None:
        lower = np.broadcast_to(np.asarray(lower, dtype=float), y.shape)
        upper = np.broadcast_to(np.asarray(upper, dtype=float), y.shape)
        if np.any(y < lower) or np.any(y > upper):
            raise InvarianceError("initial state outside its domain", t0, y)
    knots = [t0, *sorted(b for b in breakpoints if t0 < b < t1), t1]
    out_t = [t0]
    out_y = [y.copy()]
    for a, b in zip(knots, knots[1:]):
        y = _segment(fun, a, b, y, rtol, atol, lower, upper, max_stride, out_t, out_y, max_steps)
    return np.asarray(out_t), np.vstack(out_y)
