"""Negative-feedback interconnections of two monotone SISO systems:
hypothesis verification, loop equilibria, the attractive set, and
closed-loop validation by simulation."""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ._parallel import pmap
from .charmap import (CharacteristicMap, ClosedFormMap, ComposedMap, MultiMap,
                      PiecewiseLinearMap, cardinality_profile, compose_maps, dedupe, local_bound)
from .dynsys.ode import IntegrationError, solve
from .dynsys.simulate import check_monotone_sampled
from .dynsys.system import SystemDef, parse_system, parse_systems
from .inclusion import (CONV_TOL, classify_grid, find_fixed_points, iterate_paths, make_zorro,
                        membership_residual)


class HypothesisViolation(ValueError):
    pass


class RegistryError(KeyError):
    def __str__(self):
        return str(self.args[0])


@dataclass(frozen=True)
class Interconnection:
    """``ẋ = f_x(x, w), y = h_x(x)`` fed back through ``ż = f_z(z, y), w = h_z(z)``.

    ``box`` is the region of interest in product coordinates ``(x, z)``; it
    seeds initial-condition grids and the ranges of the loop signals.
    """

    name: str
    sys_x: SystemDef
    sys_z: SystemDef
    box: tuple[tuple[float, float], ...]
    metadata: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if len(self.box) != self.dimension:
            raise ValueError(f"box has {len(self.box)} intervals, need {self.dimension}")

    @property
    def dimension(self) -> int:
        return self.sys_x.dimension + self.sys_z.dimension

    @property
    def orientation(self) -> str | None:
        """``"direct"`` when the order reversal sits at ``h_z``, ``"w-reflected"``
        when it sits at the input of the x-subsystem, ``None`` if the declared
        cones do not describe a negative loop."""
        sx_in = self.sys_x.input_cone.signs[0]
        sx_out = self.sys_x.output_cone.signs[0]
        sz_in = self.sys_z.input_cone.signs[0]
        sz_out = self.sys_z.output_cone.signs[0]
        if sx_out != 1 or sz_in != 1 or sx_in * sz_out != -1:
            return None
        return "direct" if sz_out == -1 else "w-reflected"

    def split(self, y):
        n = self.sys_x.dimension
        return y[:n], y[n:]

    def rhs(self, y) -> np.ndarray:
        x, z = self.split(y)
        return np.concatenate([self.sys_x.f(x, self.sys_z.h(z)), self.sys_z.f(z, self.sys_x.h(x))])

    @property
    def lower(self):
        return np.concatenate([self.sys_x.lower, self.sys_z.lower])

    @property
    def upper(self):
        return np.concatenate([self.sys_x.upper, self.sys_z.upper])

    # characteristics
    def k_x(self) -> CharacteristicMap:
        return CharacteristicMap(self.sys_x)

    def k_y(self) -> CharacteristicMap:
        return CharacteristicMap(self.sys_x, output=True)

    def k_z(self) -> CharacteristicMap:
        return CharacteristicMap(self.sys_z)

    def k_w(self) -> CharacteristicMap:
        return CharacteristicMap(self.sys_z, output=True)

    def loop_w(self) -> ComposedMap:
        return compose_maps(self.k_w(), self.k_y())

    def loop_v(self) -> ComposedMap:
        return compose_maps(self.k_y(), self.k_w())

    def signal_range(self, which: str, samples: int = 201) -> tuple[float, float]:
        """Range of ``w = h_z(z)`` (``"w"``) or ``y = h_x(x)`` (``"y"``) over the box,
        by sampling a grid of the relevant box face."""
        sys_, box = (self.sys_z, self.box[self.sys_x.dimension:]) if which == "w" \
            else (self.sys_x, self.box[:self.sys_x.dimension])
        axes = [np.linspace(lo, hi, samples if len(box) == 1 else 21) for lo, hi in box]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(box))
        vals = [sys_.h(p) for p in pts]
        return float(min(vals)), float(max(vals))

    def start_grid(self, counts: Sequence[int]) -> list[np.ndarray]:
        axes = [np.linspace(lo, hi, c) for (lo, hi), c in zip(self.box, counts)]
        return [np.array(p) for p in np.stack(np.meshgrid(*axes, indexing="ij"), -1)
                .reshape(-1, self.dimension)]


# -- hypotheses --------------------------------------------------------------


@dataclass
class Budget:
    monotone_samples: int = 20
    monotone_horizon: float = 10.0
    seed: int = 0
    char_grid: int = 41
    grid: tuple[int, ...] = (5, 5)
    t_final: float = 60.0
    escape_radius: float = 1e6
    loop_starts: int = 9
    loop_depth: int = 200
    loop_tol: float = CONV_TOL
    image_depth: int = 8
    image_run: int = 5
    branch_cap: int = 10_000
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10

    @classmethod
    def from_dict(cls, d: dict) -> "Budget":
        known = {f for f in cls.__dataclass_fields__}
        bad = sorted(set(d) - known)
        if bad:
            raise ValueError(f"unknown budget keys: {', '.join(bad)}")
        d = dict(d)
        if "grid" in d:
            d["grid"] = tuple(int(g) for g in d["grid"])
        out = cls(**d)
        for k, v in asdict(out).items():
            vals = v if isinstance(v, tuple) else (v,)
            if k != "seed" and any(x <= 0 for x in vals):
                raise ValueError(f"budget entry {k} must be positive")
        return out

    def to_dict(self):
        d = asdict(self)
        d["grid"] = list(self.grid)
        return d


def _status(*parts: str) -> str:
    if "fail" in parts:
        return "fail"
    if "inconclusive" in parts or "skipped" in parts:
        return "inconclusive"
    return "pass"


def _simulate(ic: Interconnection, y0, t_final, rtol, atol):
    return solve(lambda t, y: ic.rhs(y), 0.0, t_final, y0, rtol, atol,
                 lower=ic.lower, upper=ic.upper)


def _boundedness(ic: Interconnection, budget: Budget) -> dict:
    starts = ic.start_grid(budget.grid)
    bound_g = ic.metadata.get("x_bound_offset")
    n = ic.sys_x.dimension

    def run(y0):
        rec = {"start": y0.tolist()}
        try:
            _, ys = _simulate(ic, y0, budget.t_final, budget.rel_tol, budget.abs_tol)
        except IntegrationError as exc:
            rec.update(bounded=False, reason=str(exc))
            return rec
        sup = float(np.max(np.abs(ys)))
        rec.update(bounded=bool(sup < budget.escape_radius), sup_norm=sup)
        if bound_g is not None:
            xmax = float(np.max(np.abs(ys[:, :n])))
            lim = float(np.max(np.abs(y0[:n]))) + bound_g
            rec["x_bound_ok"] = bool(xmax <= lim + 1e-6)
        return rec

    runs = pmap(run, starts)
    out = {"status": "pass" if all(r["bounded"] for r in runs) else "fail",
           "starts": len(runs), "escape_radius": budget.escape_radius,
           "witnesses": [r for r in runs if not r["bounded"]]}
    if bound_g is not None:
        out["x_bound_offset"] = bound_g
        out["x_bound_holds"] = all(r.get("x_bound_ok", False) for r in runs if r["bounded"])
    return out


def image_convergence(ic: Interconnection, starts: Sequence[float], depth: int = 8,
                      run: int = 5, tol: float = CONV_TOL, branch_cap: int = 10_000) -> dict:
    """Enumerate every w-sequence to ``depth`` and test that ``k_y(w_k)`` settles.

    Each image sequence must stay within ``tol`` of its final value over the
    last ``run`` steps.  ``k_y`` has to be singleton-valued for the images to
    form a sequence at all.
    """
    loop = ic.loop_w()
    k_y = ic.k_y()
    cache: dict[float, float] = {}

    def image(w):
        if w not in cache:
            vals = k_y(w)
            if len(vals) != 1:
                raise HypothesisViolation(f"k_y({w!r}) = {vals} is not a singleton")
            cache[w] = vals[0]
        return cache[w]

    limits, witnesses, total, truncated, first = [], [], 0, False, 0
    for w0 in starts:
        ps = iterate_paths(loop, w0, depth, branch_cap, tol, prune=False)
        truncated |= ps.truncated
        for p in ps.paths:
            total += 1
            imgs = [image(w) for w in p.values]
            tail = imgs[-run:]
            if len(imgs) < run or max(abs(v - tail[-1]) for v in tail) >= tol:
                if len(witnesses) < 5:
                    witnesses.append({"start": w0, "w": list(p.values), "images": imgs})
                continue
            limits.append(tail[-1])
            settled = next(k for k in range(len(imgs)) if all(abs(v - tail[-1]) < tol for v in imgs[k:]))
            first = max(first, settled)
    ok = not witnesses and not truncated
    return {"status": "pass" if ok else ("inconclusive" if truncated and not witnesses else "fail"),
            "paths": total, "depth": depth, "truncated": truncated,
            "limits": list(dedupe(limits, 1e-7)), "settled_by_step": first if ok else None,
            "witnesses": witnesses}


@dataclass
class VerificationReport:
    name: str
    orientation: str | None
    condition1: dict
    condition2: dict
    condition3: dict
    condition4: dict
    loop_equilibria: list[float]
    attractive_set: list[dict]
    budgets: dict
    notes: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return _status(*(c["status"] for c in
                         (self.condition1, self.condition2, self.condition3, self.condition4)))

    @property
    def blocking(self) -> list[str]:
        return [k for k in ("condition1", "condition2", "condition3", "condition4")
                if getattr(self, k)["status"] != "pass"]

    def to_dict(self):
        return {"name": self.name, "orientation": self.orientation,
                "condition1": self.condition1, "condition2": self.condition2,
                "condition3": self.condition3, "condition4": self.condition4,
                "loop_equilibria": self.loop_equilibria, "attractive_set": self.attractive_set,
                "verdict": self.verdict, "blocking": self.blocking,
                "evidence": "sampled", "budgets": self.budgets, "notes": self.notes}

    def to_text(self) -> str:
        lines = [f"interconnection {self.name}: {self.verdict} (sampled)"]
        for k in ("condition1", "condition2", "condition3", "condition4"):
            lines.append(f"  {k}: {getattr(self, k)['status']}")
        lines.append("  loop equilibria: " + ", ".join(f"{w:.12g}" for w in self.loop_equilibria))
        for pair in self.attractive_set:
            zs = "; ".join(" ".join(f"{v:.10g}" for v in z) for z in pair["z_set"])
            lines.append(f"  attractive: x={' '.join(f'{v:.10g}' for v in pair['x'])} z in {{{zs}}}")
        if self.blocking:
            lines.append("  blocking: " + ", ".join(self.blocking))
        return "\n".join(lines) + "\n"


def verify_hypotheses(ic: Interconnection, budget: Budget | None = None,
                      fail_fast: bool = False) -> VerificationReport:
    """Sampled check of the four small-gain hypotheses for ``ic``.

    1. the x-subsystem is monotone with its declared cones;
    2. the z-subsystem is monotone with its declared cones, and the cones
       close a negative loop;
    3. ``k_x`` is singleton-valued and ``k_z`` locally bounded on the loop ranges;
    4. closed-loop trajectories from the start grid stay bounded, and every
       solution of the w-inclusion converges (or, failing that, every
       ``k_y`` image sequence does).

    With ``fail_fast`` the later conditions are skipped once 1 or 2 fails.
    """
    b = budget or Budget()
    notes = []
    orient = ic.orientation
    c1 = {"monotone": check_monotone_sampled(ic.sys_x, b.monotone_samples, b.monotone_horizon,
                                             b.seed).to_dict()}
    c1["status"] = "pass" if c1["monotone"]["pass"] else "fail"
    c2 = {"monotone": check_monotone_sampled(ic.sys_z, b.monotone_samples, b.monotone_horizon,
                                             b.seed).to_dict(),
          "orientation": orient}
    c2["status"] = "pass" if c2["monotone"]["pass"] and orient else "fail"
    if not orient:
        c2["orientation_witness"] = {
            "x": {"input_cone": str(ic.sys_x.input_cone), "output_cone": str(ic.sys_x.output_cone)},
            "z": {"input_cone": str(ic.sys_z.input_cone), "output_cone": str(ic.sys_z.output_cone)},
            "reason": "declared cones do not reverse the order exactly once around the loop"}

    if fail_fast and "fail" in (c1["status"], c2["status"]):
        skipped = {"status": "skipped"}
        notes.append("conditions 3 and 4 skipped after an earlier failure")
        return VerificationReport(ic.name, orient, c1, c2, dict(skipped), dict(skipped), [], [],
                                  b.to_dict(), notes)

    w_lo, w_hi = ic.signal_range("w")
    y_lo, y_hi = ic.signal_range("y")
    k_x = ic.k_x()
    ws = np.linspace(w_lo, w_hi, b.char_grid)
    cards = pmap(lambda w: len(k_x(w)), ws)
    multi = [{"w": float(w), "count": c} for w, c in zip(ws, cards) if c != 1]
    kz_bound = local_bound(ic.k_z(), y_lo, y_hi, b.char_grid) if ic.sys_z.dimension == 1 else None
    c3 = {"k_x_singleton": {"pass": not multi, "grid": [w_lo, w_hi, b.char_grid],
                            "witnesses": multi[:5]},
          "k_z_bounded": kz_bound}
    if kz_bound is None:
        c3["status"] = "inconclusive"
        notes.append("condition3: k_z of a non-scalar subsystem is not computed")
    else:
        c3["status"] = _status("pass" if not multi else "fail",
                               "pass" if kz_bound["stable"] else "fail")

    c4 = {"bounded": _boundedness(ic, b)}
    if c3["k_x_singleton"]["pass"] and ic.sys_z.dimension == 1:
        wstarts = np.linspace(w_lo, w_hi, b.loop_starts)
        vstarts = np.linspace(y_lo, y_hi, b.loop_starts)
        w_sum = classify_grid(ic.loop_w(), wstarts, b.loop_depth, b.loop_tol, b.branch_cap,
                              b.escape_radius)
        v_sum = classify_grid(ic.loop_v(), vstarts, b.loop_depth, b.loop_tol, b.branch_cap,
                              b.escape_radius)
        c4["w_sequences"] = w_sum.to_dict()
        c4["v_sequences"] = v_sum.to_dict()
        if w_sum.verdict == "all-converge":
            c4["route"] = "4"
            loop_status = "pass"
        else:
            img = image_convergence(ic, wstarts, b.image_depth, b.image_run, b.loop_tol,
                                    b.branch_cap)
            c4["k_y_images"] = img
            c4["route"] = "4'"
            loop_status = img["status"]
            if v_sum.verdict != "all-converge" and loop_status == "pass":
                loop_status = "inconclusive"
                notes.append("condition4: k_y images settle but v-sequences did not all converge")
        c4["status"] = _status(c4["bounded"]["status"], loop_status)
    else:
        c4["status"] = _status(c4["bounded"]["status"], "inconclusive")
        notes.append("condition4: loop inclusion skipped (needs singleton k_x and scalar z)")

    eqs, pairs = [], []
    if c3["status"] == "pass":
        eqs = loop_equilibria(ic, w_lo, w_hi)
        pairs = [p.to_dict() for p in attractive_set(ic, eqs)]
    return VerificationReport(ic.name, orient, c1, c2, c3, c4, eqs, pairs, b.to_dict(), notes)


def loop_equilibria(ic: Interconnection, lo: float | None = None, hi: float | None = None,
                    tol: float = CONV_TOL, grid: int = 201) -> list[float]:
    """``E(k_w ∘ k_y)`` on ``[lo, hi]`` (defaults: the range of ``w`` over the box)."""
    if lo is None or hi is None:
        r = ic.signal_range("w")
        lo = r[0] if lo is None else lo
        hi = r[1] if hi is None else hi
    return find_fixed_points(ic.loop_w(), lo, hi, grid, tol)


@dataclass(frozen=True)
class AttractivePair:
    w: float
    x: tuple[float, ...]
    z_set: tuple[tuple[float, ...], ...]

    def points(self):
        return [np.array(self.x + z) for z in self.z_set]

    def to_dict(self):
        return {"w": self.w, "x": list(self.x), "z_set": [list(z) for z in self.z_set]}


def attractive_set(ic: Interconnection, equilibria: Sequence[float]) -> list[AttractivePair]:
    """Pairs ``({k_x(w)}, (k_z ∘ k_y)(w))`` for each loop equilibrium ``w``."""
    k_x, k_y, k_z = ic.k_x(), ic.k_y(), ic.k_z()
    out = []
    for w in equilibria:
        xs = k_x(w)
        if len(xs) != 1:
            raise HypothesisViolation(f"k_x({w!r}) = {xs} is not a singleton")
        zs = dedupe(z for y in k_y(w) for z in k_z(y))
        out.append(AttractivePair(float(w), (xs[0],), tuple((z,) for z in zs)))
    return out


@dataclass
class ConvergenceReport:
    passed: bool
    dist_tol: float
    t_final: float
    runs: list[dict]

    def __bool__(self):
        return self.passed

    def to_dict(self):
        return {"pass": self.passed, "dist_tol": self.dist_tol, "t_final": self.t_final,
                "runs": self.runs}


def validate_convergence(ic: Interconnection, starts: Sequence, t_final: float = 60.0,
                         dist_tol: float = 1e-3, pairs: Sequence[AttractivePair] | None = None,
                         escape_radius: float = 1e6, rel_tol: float = 1e-8,
                         abs_tol: float = 1e-10) -> ConvergenceReport:
    """Simulate the closed loop from each start and measure the distance of the
    terminal state to the attractive set (every point of every pair's z-set)."""
    if pairs is None:
        pairs = attractive_set(ic, loop_equilibria(ic))
    targets = [(i, j, pt) for i, p in enumerate(pairs) for j, pt in enumerate(p.points())]
    if not targets:
        raise HypothesisViolation("attractive set is empty")
    n = ic.sys_x.dimension
    bound_g = ic.metadata.get("x_bound_offset")

    def run(y0):
        y0 = np.asarray(y0, dtype=float)
        rec = {"start": y0.tolist()}
        try:
            _, ys = _simulate(ic, y0, t_final, rel_tol, abs_tol)
        except IntegrationError as exc:
            rec.update(bounded=False, reason=str(exc), distance=math.inf)
            return rec
        end = ys[-1]
        d, i, j = min((float(np.linalg.norm(end - pt)), i, j) for i, j, pt in targets)
        rec.update(terminal=end.tolist(), distance=d, pair=i, z_member=j,
                   bounded=bool(np.max(np.abs(ys)) < escape_radius),
                   max_abs_x=float(np.max(np.abs(ys[:, :n]))))
        if bound_g is not None:
            rec["x_bound_ok"] = bool(rec["max_abs_x"] <= np.max(np.abs(y0[:n])) + bound_g + 1e-6)
        return rec

    runs = pmap(run, list(starts))
    ok = all(r["bounded"] and r["distance"] < dist_tol for r in runs)
    return ConvergenceReport(ok, dist_tol, t_final, runs)


# -- registry ----------------------------------------------------------------

_P = "x1*(2*x1^2 - 9*x1 + 12)"

SYSTEM_CONFIGS = {
    "sec5-x": """system sec5-x
dim 1
input_range 0..inf
rhs1 = -x1 + 5 + u
output = x1
state_cone + input_cone + output_cone +
""",
    "sec5-z": f"""system sec5-z
dim 1
input_range 0..inf
rhs1 = -({_P}) + u
output = 1/(1 + x1^2)
state_cone + input_cone + output_cone -
""",
    "sec5-x-ex": """system sec5-x-ex
dim 1
input_range 0..inf
rhs1 = -x1 + 5 + 1/(1 + u^2)
output = x1
state_cone + input_cone - output_cone +
""",
    "sec5-z-ex": f"""system sec5-z-ex
dim 1
input_range 0..inf
rhs1 = -({_P}) + u
output = x1
state_cone + input_cone + output_cone +
""",
    "multiequil-x": """system multiequil-x
dim 1
input_range 0..inf
rhs1 = -x1 + pwl(u; 0,5; 0.5,4.5; 2.5,4.5; 3.5,3)
output = x1
state_cone + input_cone - output_cone +
""",
    "rotation": """system rotation
dim 2
state_domain -inf..inf -inf..inf
input_range -inf..inf
rhs1 = -x2
rhs2 = x1
output = x1
state_cone ++ input_cone + output_cone +
""",
    "growth": """system growth
dim 1
rhs1 = x1
output = x1
""",
    "decay": """system decay
dim 1
rhs1 = -x1
output = x1
state_cone + input_cone - output_cone +
""",
}

SEC5_BOX = ((0.0, 10.0), (0.0, 5.0))
R_VERTICES = ((0.0, 5.0), (0.5, 4.5), (2.5, 4.5), (3.5, 3.0))


@dataclass(frozen=True)
class Entry:
    name: str
    kind: str  # interconnection | map | system
    description: str

    def build(self):
        return _BUILDERS[self.name]()


def _sys(name):
    return parse_system(SYSTEM_CONFIGS[name])


def _ic(name, x, z, **meta):
    return Interconnection(name, _sys(x), _sys(z), SEC5_BOX, meta)


_BUILDERS = {
    "sec5-original": lambda: _ic("sec5-original", "sec5-x", "sec5-z", x_bound_offset=6.0),
    "sec5-positive-form": lambda: _ic("sec5-positive-form", "sec5-x-ex", "sec5-z-ex",
                                      x_bound_offset=6.0),
    "multiequil": lambda: _ic("multiequil", "multiequil-x", "sec5-z-ex"),
    "sec5-miswired": lambda: Interconnection(
        "sec5-miswired", _sys("sec5-x"),
        parse_system(SYSTEM_CONFIGS["sec5-z"].replace("output_cone -", "output_cone +")),
        SEC5_BOX),
    "zorro": lambda: make_zorro(0.0),
    "zorro-eps(1.5)": lambda: make_zorro(1.5),
    "k1": lambda: ClosedFormMap("5 + 1/(1 + u^2)", (0.0, math.inf)),
    "k2": lambda: CharacteristicMap(_sys("sec5-z-ex")),
    "k2-k1": lambda: compose_maps(CharacteristicMap(_sys("sec5-z-ex")),
                                  ClosedFormMap("5 + 1/(1 + u^2)", (0.0, math.inf))),
    "R": lambda: PiecewiseLinearMap(R_VERTICES),
    **{name: (lambda n=name: _sys(n)) for name in SYSTEM_CONFIGS},
}

_DESCRIPTIONS = {
    "sec5-original": ("interconnection", "x' = -x+5+w, y = x;  z' = -P(z)+y, w = 1/(1+z^2)"),
    "sec5-positive-form": ("interconnection", "x' = -x+5+1/(1+w^2), y = x;  z' = -P(z)+y, w = z"),
    "multiequil": ("interconnection", "x' = -x+R(w), y = x;  z' = -P(z)+y, w = z"),
    "sec5-miswired": ("interconnection", "sec5-original with the z output cone declared '+'"),
    "zorro": ("map", "folded three-segment map (0,0),(.5,.25),(.25,.5),(1,1)"),
    "zorro-eps(1.5)": ("map", "perturbed folded map, middle slope -2.5; any zorro-eps(e) resolves"),
    "k1": ("map", "5 + 1/(1+w^2)"),
    "k2": ("map", "state characteristic of z' = -P(z)+y"),
    "k2-k1": ("map", "loop map k2 o k1 of the positive form"),
    "R": ("map", "polyline (0,5),(.5,4.5),(2.5,4.5),(3.5,3)"),
    "sec5-x": ("system", "x' = -x+5+u"),
    "sec5-z": ("system", "z' = -P(z)+u, y = 1/(1+z^2), P(z) = z(2z^2-9z+12)"),
    "sec5-x-ex": ("system", "x' = -x+5+1/(1+u^2)"),
    "sec5-z-ex": ("system", "z' = -P(z)+u, y = z"),
    "multiequil-x": ("system", "x' = -x+R(u)"),
    "rotation": ("system", "x1' = -x2, x2' = x1 (not monotone)"),
    "growth": ("system", "z' = z (no reachable equilibrium)"),
    "decay": ("system", "x' = -x (constant characteristic 0)"),
}


def builtin_examples() -> dict[str, Entry]:
    return {name: Entry(name, *_DESCRIPTIONS[name]) for name in _BUILDERS}


_ZORRO_EPS = re.compile(r"zorro-eps\(\s*([^)]+?)\s*\)")


def lookup(name: str):
    """Build a registry entry by name; ``zorro-eps(<eps>)`` accepts any ``eps >= 0``."""
    if name in _BUILDERS:
        return _BUILDERS[name]()
    m = _ZORRO_EPS.fullmatch(name)
    if m:
        try:
            eps = float(m.group(1))
        except ValueError:
            raise RegistryError(f"bad epsilon in {name!r}") from None
        return make_zorro(eps)
    raise RegistryError(f"unknown example {name!r}; available: {', '.join(sorted(_BUILDERS))}")


def interconnection_from_config(text: str, name: str = "config", box=None) -> Interconnection:
    """Two ``system`` blocks: the first is the x-subsystem, the second the z-subsystem."""
    systems = parse_systems(text)
    if len(systems) != 2:
        raise ValueError(f"an interconnection needs exactly two systems, found {len(systems)}")
    sx, sz = systems
    if box is None:
        box = tuple((lo if math.isfinite(lo) else -10.0, hi if math.isfinite(hi) else lo + 10.0
                     if math.isfinite(lo) else 10.0)
                    for lo, hi in (*sx.state_domain, *sz.state_domain))
    return Interconnection(name, sx, sz, tuple(box))
