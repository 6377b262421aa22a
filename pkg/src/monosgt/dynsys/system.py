"""SISO system definitions, the line-oriented config format, input signals."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from ..order import OrderCone, OrderError
from .expr import Expression, ExpressionError


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if col is not None:
            loc.append(f"column {col}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)


Interval = tuple[float, float]


@dataclass(frozen=True)
class SystemDef:
    """``dx/dt = f(x, u)``, ``y = h(x)`` with ordering cones on X, U and Y."""

    name: str
    dimension: int
    rhs: tuple[Expression, ...]
    output: Expression
    state_cone: OrderCone
    input_cone: OrderCone = OrderCone((1,))
    output_cone: OrderCone = OrderCone((1,))
    state_domain: tuple[Interval, ...] = ()
    input_range: Interval = (0.0, math.inf)

    def __post_init__(self):
        n = self.dimension
        if n < 1:
            raise ConfigError(f"dimension must be positive, got {n}")
        if len(self.rhs) != n:
            raise ConfigError(f"expected {n} right-hand sides, got {len(self.rhs)}")
        if not self.state_domain:
            object.__setattr__(self, "state_domain", ((0.0, math.inf),) * n)
        if len(self.state_domain) != n:
            raise ConfigError(f"state_domain has {len(self.state_domain)} intervals, need {n}")
        for lo, hi in self.state_domain:
            if not lo < hi:
                raise ConfigError(f"empty state interval {lo}..{hi}")
        if self.state_cone.dimension != n:
            raise ConfigError(f"state cone {self.state_cone} does not have dimension {n}")
        if self.input_cone.dimension != 1 or self.output_cone.dimension != 1:
            raise ConfigError("input and output cones must be scalar")
        for e in (*self.rhs, self.output):
            if e.max_state_index > n:
                raise ConfigError(f"unknown variable x{e.max_state_index} in {e} (dim {n})")

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.state_domain])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.state_domain])

    def f(self, x, u) -> np.ndarray:
        return np.array([e(x, u) for e in self.rhs], dtype=float)

    def h(self, x) -> float:
        return float(self.output(x, 0.0))

    def to_config(self) -> str:
        def num(v):
            return "inf" if v == math.inf else ("-inf" if v == -math.inf else repr(float(v)))

        lines = [f"system {self.name}", f"dim {self.dimension}"]
        lines.append("state_domain " + " ".join(f"{num(a)}..{num(b)}" for a, b in self.state_domain))
        lines.append(f"input_range {num(self.input_range[0])}..{num(self.input_range[1])}")
        for i, e in enumerate(self.rhs, start=1):
            lines.append(f"rhs{i} = {e}")
        lines.append(f"output = {self.output}")
        lines.append(
            f"state_cone {self.state_cone}  input_cone {self.input_cone}  output_cone {self.output_cone}"
        )
        return "\n".join(lines) + "\n"


def _parse_bound(text: str, line: int) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf"):
        return math.inf
    if t == "-inf":
        return -math.inf
    try:
        return float(t)
    except ValueError:
        raise ConfigError(f"bad bound {text!r}", line) from None


def _parse_interval(tok: str, line: int) -> Interval:
    if ".." not in tok:
        raise ConfigError(f"interval must look like lo..hi, got {tok!r}", line)
    lo, hi = tok.split("..", 1)
    return _parse_bound(lo, line), _parse_bound(hi, line)


_CONE_KEYS = ("state_cone", "input_cone", "output_cone")


def _build(block: dict, start_line: int) -> SystemDef:
    if "dim" not in block:
        raise ConfigError("missing 'dim' line", start_line)
    n = block["dim"]
    rhs_lines = block["rhs"]
    for i in range(1, n + 1):
        if i not in rhs_lines:
            raise ConfigError(f"missing rhs{i}", start_line)
    extra = sorted(set(rhs_lines) - set(range(1, n + 1)))
    if extra:
        raise ConfigError(f"rhs{extra[0]} exceeds dimension {n}", rhs_lines[extra[0]][1])
    if "output" not in block:
        raise ConfigError("missing 'output' line", start_line)

    for expr, line, col in [*(rhs_lines[i] for i in range(1, n + 1)), block["output"]]:
        if expr.max_state_index > n:
            raise ConfigError(f"unknown variable x{expr.max_state_index} (dim {n})", line, col)

    cones = block["cones"]
    try:
        state_cone = OrderCone.parse(cones.get("state_cone", ("+" * n, 0))[0])
        input_cone = OrderCone.parse(cones.get("input_cone", ("+", 0))[0])
        output_cone = OrderCone.parse(cones.get("output_cone", ("+", 0))[0])
    except OrderError as exc:
        raise ConfigError(str(exc), block.get("cone_line")) from None
    if state_cone.dimension != n:
        raise ConfigError(f"state cone {state_cone} has dimension {state_cone.dimension}, need {n}",
                          cones["state_cone"][1])
    if input_cone.dimension != 1 or output_cone.dimension != 1:
        raise ConfigError("input/output cones must have a single sign", block.get("cone_line"))
    domain = block.get("state_domain") or ((0.0, math.inf),) * n
    if len(domain) != n:
        raise ConfigError(f"state_domain lists {len(domain)} intervals, need {n}",
                          block.get("domain_line"))
    try:
        return SystemDef(
            name=block["name"],
            dimension=n,
            rhs=tuple(rhs_lines[i][0] for i in range(1, n + 1)),
            output=block["output"][0],
            state_cone=state_cone,
            input_cone=input_cone,
            output_cone=output_cone,
            state_domain=tuple(domain),
            input_range=block.get("input_range", (0.0, math.inf)),
        )
    except ConfigError as exc:
        raise ConfigError(exc.message, start_line) from None


def parse_systems(text: str) -> list[SystemDef]:
    """Parse every ``system`` block in a config document."""
    blocks = []
    cur = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        indent = len(line) - len(line.lstrip())
        m = re.fullmatch(r"system\s+([A-Za-z_][\w\-.]*)", stripped)
        if m:
            cur = {"name": m.group(1), "rhs": {}, "cones": {}, "line": lineno}
            blocks.append(cur)
            continue
        if cur is None:
            raise ConfigError("expected 'system <name>' first", lineno, indent + 1)
        m = re.fullmatch(r"(rhs(\d+)|output)\s*=\s*(.*)", stripped)
        if m:
            body = m.group(3)
            col0 = indent + stripped.index(body) if body else indent + len(stripped)
            try:
                expr = Expression.parse(body)
            except ExpressionError as exc:
                raise ConfigError(exc.message, lineno, (exc.col or 1) + col0) from None
            if m.group(2):
                cur["rhs"][int(m.group(2))] = (expr, lineno, col0 + 1)
            else:
                cur["output"] = (expr, lineno, col0 + 1)
            continue
        words = stripped.split()
        key = words[0]
        if key == "dim":
            if len(words) != 2 or not words[1].isdigit() or int(words[1]) < 1:
                raise ConfigError("dim must be a positive integer", lineno, indent + 1)
            cur["dim"] = int(words[1])
        elif key == "state_domain":
            cur["state_domain"] = [_parse_interval(w, lineno) for w in words[1:]]
            cur["domain_line"] = lineno
        elif key == "input_range":
            if len(words) != 2:
                raise ConfigError("input_range takes one lo..hi interval", lineno)
            cur["input_range"] = _parse_interval(words[1], lineno)
        elif key in _CONE_KEYS:
            cur["cone_line"] = lineno
            k = 0
            while k < len(words):
                ck = words[k]
                if ck not in _CONE_KEYS:
                    raise ConfigError(f"unexpected token {ck!r}", lineno, line.find(ck) + 1)
                if k + 1 >= len(words) or words[k + 1] in _CONE_KEYS:
                    # blank sign string keeps the default
                    k += 1
                    continue
                sign = words[k + 1]
                if not re.fullmatch(r"[+-]+", sign):
                    raise ConfigError(f"malformed cone string {sign!r}", lineno, line.find(sign) + 1)
                cur["cones"][ck] = (sign, lineno)
                k += 2
        else:
            raise ConfigError(f"unknown directive {key!r}", lineno, indent + 1)
    if not blocks:
        raise ConfigError("document declares no system")
    return [_build(b, b["line"]) for b in blocks]


def parse_system(text: str) -> SystemDef:
    systems = parse_systems(text)
    if len(systems) != 1:
        raise ConfigError(f"expected exactly one system, found {len(systems)}")
    return systems[0]


# -- input signals -----------------------------------------------------------


@dataclass(frozen=True)
class InputSignal:
    """Constant, piecewise-constant or sampled (linearly interpolated) input.

    For ``piecewise_constant`` the value ``values[i]`` holds on
    ``[times[i], times[i+1])``; the last value holds forever and the first
    one before ``times[0]``.  Sampled signals are clamped outside their grid.
    """

    kind: str
    times: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("constant", "piecewise_constant", "sampled"):
            raise ValueError(f"unknown input kind {self.kind!r}")
        if not self.values or not all(math.isfinite(v) for v in self.values):
            raise ValueError("input values must be finite and non-empty")
        if self.kind == "constant":
            if len(self.values) != 1:
                raise ValueError("constant input takes exactly one value")
        else:
            if len(self.times) != len(self.values):
                raise ValueError("times and values must have the same length")
            if any(b <= a for a, b in zip(self.times, self.times[1:])):
                raise ValueError("input time grid must be strictly increasing")

    @classmethod
    def constant(cls, value: float) -> "InputSignal":
        return cls("constant", (), (float(value),))

    @classmethod
    def piecewise_constant(cls, times, values) -> "InputSignal":
        return cls("piecewise_constant", tuple(map(float, times)), tuple(map(float, values)))

    @classmethod
    def sampled(cls, times, values) -> "InputSignal":
        return cls("sampled", tuple(map(float, times)), tuple(map(float, values)))

    def __call__(self, t: float) -> float:
        if self.kind == "constant":
            return self.values[0]
        if self.kind == "piecewise_constant":
            i = int(np.searchsorted(self.times, t, side="right")) - 1
            return self.values[max(i, 0)]
        return float(np.interp(t, self.times, self.values))

    def breakpoints(self, t0: float, t1: float) -> list[float]:
        """Times strictly inside ``(t0, t1)`` where integration should restart."""
        if self.kind == "constant":
            return []
        return [t for t in self.times if t0 < t < t1]
