"""Trajectories of a :class:`SystemDef`, omega-limit estimates, and the
sampled monotonicity test."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..order import OrderCone
from .ode import solve
from .system import InputSignal, SystemDef


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), n)
    inputs: np.ndarray
    outputs: np.ndarray

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self) -> str:
        n = self.states.shape[1]
        header = ["t", *(f"x{i}" for i in range(1, n + 1)), "u", "y"]
        rows = [",".join(header)]
        for t, x, u, y in zip(self.times, self.states, self.inputs, self.outputs):
            rows.append(",".join(f"{v:.17g}" for v in (t, *x, u, y)))
        return "\n".join(rows) + "\n"


def _segments(signals: Sequence[InputSignal], t_final: float) -> list[float]:
    knots = {0.0, float(t_final)}
    for s in signals:
        knots.update(s.breakpoints(0.0, t_final))
    return sorted(knots)


def run_segments(
    rhs: Callable[[np.ndarray, tuple], np.ndarray],
    x0,
    signals: Sequence[InputSignal],
    t_final: float,
    rtol: float,
    atol: float,
    lower=None,
    upper=None,
    max_stride=None,
):
    """Integrate ``rhs(x, inputs)`` restarting at every input breakpoint.

    Piecewise-constant inputs are frozen at their segment value so that the
    RK stages at a segment's right end never see the next value.
    """
    knots = _segments(signals, t_final)
    ts = [np.array([0.0])]
    xs = [np.atleast_2d(np.asarray(x0, dtype=float))]
    x = np.asarray(x0, dtype=float)
    for a, b in zip(knots, knots[1:]):
        mid = 0.5 * (a + b)
        frozen = [s(mid) if s.kind != "sampled" else None for s in signals]

        def fun(t, y, frozen=frozen):
            us = tuple(fz if fz is not None else s(t) for fz, s in zip(frozen, signals))
            return rhs(y, us)

        t_seg, x_seg = solve(fun, a, b, x, rtol, atol, lower=lower, upper=upper,
                             max_stride=max_stride)
        ts.append(t_seg[1:])
        xs.append(x_seg[1:])
        x = x_seg[-1]
    return np.concatenate(ts), np.vstack(xs)


def integrate(
    sys: SystemDef,
    x0,
    u: InputSignal | float,
    t_final: float,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-10,
    max_stride: float | None = None,
) -> Trajectory:
    """Simulate ``sys`` from ``x0`` under input ``u`` on ``[0, t_final]``."""
    if not isinstance(u, InputSignal):
        u = InputSignal.constant(u)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (sys.dimension,):
        raise ValueError(f"x0 has shape {x0.shape}, system dimension is {sys.dimension}")
    rhs = lambda x, us: sys.f(x, us[0])  # noqa: E731
    times, states = run_segments(rhs, x0, [u], t_final, rel_tol, abs_tol,
                                 sys.lower, sys.upper, max_stride)
    inputs = np.array([u(t) for t in times])
    outputs = np.array([sys.h(x) for x in states])
    return Trajectory(times, states, inputs, outputs)


@dataclass
class OmegaLimit:
    """Outcome of :func:`omega_limit_estimate`; truthy only when settled."""

    settled: bool
    point: np.ndarray
    residual: float
    drift: float

    def __bool__(self):
        return self.settled


def omega_limit_estimate(
    sys: SystemDef,
    x0,
    u_const: float,
    t_final: float = 50.0,
    settle_tol: float = 1e-6,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
) -> OmegaLimit:
    """Integrate with constant input and decide whether the run has settled.

    Settled means the state stayed within ``settle_tol`` of its terminal
    value over the last tenth of the window and ``|f(terminal, u)|`` is
    below ``settle_tol``.  An unsettled run is a normal outcome, not an error.
    """
    traj = integrate(sys, x0, InputSignal.constant(u_const), t_final, rel_tol, abs_tol)
    end = traj.final_state
    tail = traj.states[traj.times >= 0.9 * t_final]
    drift = float(np.max(np.abs(tail - end))) if len(tail) else 0.0
    residual = float(np.max(np.abs(sys.f(end, u_const))))
    return OmegaLimit(drift < settle_tol and residual < settle_tol, end, residual, drift)


# -- monotonicity ------------------------------------------------------------


@dataclass
class MonotonicityReport:
    passed: bool
    samples: int
    witness: dict | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"pass": self.passed, "samples": self.samples, "witness": self.witness,
                "notes": list(self.notes)}


def _violation(cone: OrderCone, a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    d = np.asarray(cone.signs) * (b - a)
    return bool(np.any(d < -tol * (1.0 + np.maximum(np.abs(a), np.abs(b)))))


def _box(lo: float, hi: float, width: float) -> tuple[float, float]:
    if math.isfinite(lo):
        return lo, min(hi, lo + width)
    if math.isfinite(hi):
        return hi - width, hi
    return -width / 2, width / 2


def check_monotone_sampled(
    sys: SystemDef,
    sample_count: int = 20,
    t_final: float = 10.0,
    seed: int = 0,
    state_width: float = 5.0,
    input_width: float = 10.0,
    tol: float = 1e-7,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-11,
) -> MonotonicityReport:
    """Falsification test of input/state monotonicity and output monotonicity.

    Draws ordered initial pairs ``p ⪯ q`` and ordered input pairs ``u ⪯ v``
    (constant for even samples, piecewise constant for odd ones), integrates
    both copies on a shared time grid, and checks the order of states and of
    outputs at every stored time.  The first violation becomes the witness.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    n = sys.dimension
    xsig = np.asarray(sys.state_cone.signs, dtype=float)
    usig = sys.input_cone.signs[0]
    boxes = [_box(lo, hi, state_width) for lo, hi in sys.state_domain]
    ulo, uhi = _box(*sys.input_range, input_width)

    def ordered_pair_states():
        p = np.array([rng.uniform(a, b) for a, b in boxes])
        step = rng.uniform(0, 1, n) * (rng.random(n) < 0.8)
        q = p + xsig * step
        q = np.clip(q, sys.lower, sys.upper)
        return p, q

    def ordered_inputs(k):
        if k % 2 == 0:
            u = rng.uniform(ulo, uhi)
            v = np.clip(u + usig * rng.uniform(0, 0.3 * (uhi - ulo)), ulo, uhi)
            return InputSignal.constant(u), InputSignal.constant(v)
        m = 4
        times = np.concatenate([[0.0], np.sort(rng.uniform(0, t_final, m - 1))])
        us = rng.uniform(ulo, uhi, m)
        vs = np.clip(us + usig * rng.uniform(0, 0.3 * (uhi - ulo), m), ulo, uhi)
        return InputSignal.piecewise_constant(times, us), InputSignal.piecewise_constant(times, vs)

    lower = np.concatenate([sys.lower, sys.lower])
    upper = np.concatenate([sys.upper, sys.upper])

    def rhs(y, us):
        return np.concatenate([sys.f(y[:n], us[0]), sys.f(y[n:], us[1])])

    for k in range(sample_count):
        p, q = ordered_pair_states()
        u, v = ordered_inputs(k)
        times, ys = run_segments(rhs, np.concatenate([p, q]), [u, v], t_final,
                                 rel_tol, abs_tol, lower, upper)
        for t, y in zip(times, ys):
            a, b = y[:n], y[n:]
            kind = None
            if _violation(sys.state_cone, a, b, tol):
                kind = "state"
            elif _violation(sys.output_cone, np.atleast_1d(sys.h(a)), np.atleast_1d(sys.h(b)), tol):
                kind = "output"
            if kind:
                return MonotonicityReport(False, k + 1, {
                    "kind": kind,
                    "p": p.tolist(), "q": q.tolist(),
                    "u": _signal_dict(u), "v": _signal_dict(v),
                    "t": float(t),
                    "state_p": a.tolist(), "state_q": b.tolist(),
                    "output_p": sys.h(a), "output_q": sys.h(b),
                })
    return MonotonicityReport(True, sample_count)


def _signal_dict(s: InputSignal) -> dict:
    return {"kind": s.kind, "times": list(s.times), "values": list(s.values)}
