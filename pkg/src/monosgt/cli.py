"""``monosgt`` command line.

Exit codes: 0 success, 1 analysis failure (a hypothesis or check failed,
or the numerics gave up), 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .charmap import (CharacteristicMap, DegenerateCharacteristicError, MapDomainError, MultiMap,
                      PiecewiseLinearMap, UnsupportedDimensionError, cardinality_profile,
                      sample_branches, verify_characteristic)
from .dynsys import ConfigError, EvaluationError, ExpressionError, InputSignal, SystemDef
from .dynsys.ode import IntegrationError, solve
from .dynsys.simulate import integrate
from .dynsys.system import parse_systems
from .export import RECIPES, branches_csv, dumps, script_for_artifact
from .inclusion import classify_grid, find_fixed_points, iterate_paths, membership_residual, paths_csv
from .smallgain import (Budget, HypothesisViolation, Interconnection, RegistryError,
                        attractive_set, builtin_examples, interconnection_from_config,
                        loop_equilibria, lookup, validate_convergence, verify_hypotheses)

CONFIG_GRAMMAR = """config grammar (one 'system' block per subsystem; an interconnection file holds two):
  system <name>
  dim <n>
  state_domain <lo>..<hi> ...        ("inf" allowed; default 0..inf)
  input_range <lo>..<hi>             (default 0..inf)
  rhs<i> = <expression>              (i = 1..n)
  output = <expression>
  state_cone <signs> input_cone <+|-> output_cone <+|->
expressions: numbers, x1..xn, u, + - * /, ^integer, parentheses, unary minus,
  pwl(<expr>; a0,b0; a1,b1; ...) for piecewise-linear functions
"""


class UsageError(Exception):
    pass


class AnalysisFailure(Exception):
    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n\n{CONFIG_GRAMMAR}")
        raise SystemExit(2)


# -- argument helpers --------------------------------------------------------


def _floats(text: str, sep=",") -> list[float]:
    try:
        return [float(v) for v in text.split(sep) if v.strip()]
    except ValueError:
        raise UsageError(f"expected numbers separated by {sep!r}, got {text!r}") from None


def _range(text: str, need_count: bool):
    parts = text.split(":")
    if len(parts) != (3 if need_count else 2):
        raise UsageError(f"expected LO:HI{':N' if need_count else ''}, got {text!r}")
    lo, hi = _floats(parts[0]) + _floats(parts[1])
    if not hi > lo:
        raise UsageError(f"empty range {text!r}")
    if need_count:
        try:
            n = int(parts[2])
        except ValueError:
            raise UsageError(f"bad count in {text!r}") from None
        if n < 2:
            raise UsageError("grid count must be >= 2")
        return lo, hi, n
    return lo, hi


def _read_table(path: str) -> tuple[list[float], list[float]]:
    ts, vs = [], []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line or line[0].isalpha():
            continue
        a, b = _floats(line.replace(";", ","))[:2]
        ts.append(a)
        vs.append(b)
    if not ts:
        raise UsageError(f"{path}: no data rows")
    return ts, vs


def _input(text: str) -> InputSignal:
    kind, _, arg = text.partition(":")
    try:
        if kind == "const":
            return InputSignal.constant(_floats(arg)[0])
        if kind in ("pwc", "sampled"):
            ts, vs = _read_table(arg)
            return (InputSignal.piecewise_constant if kind == "pwc" else InputSignal.sampled)(ts, vs)
    except (ValueError, IndexError) as exc:
        raise UsageError(f"bad input {text!r}: {exc}") from None
    raise UsageError(f"input must be const:V, pwc:FILE or sampled:FILE, got {text!r}")


def resolve(target: str):
    """Registry names win over files; a file holds one system, two systems
    (an interconnection) or a vertex list ``input,value`` per line."""
    try:
        return lookup(target)
    except RegistryError as exc:
        reg_err = exc
    path = Path(target)
    if not path.exists():
        raise UsageError(f"{target!r} is neither a file nor a builtin example ({reg_err})")
    text = path.read_text(encoding="utf-8")
    first = next((ln.split("#", 1)[0].strip() for ln in text.splitlines()
                  if ln.split("#", 1)[0].strip()), "")
    if first.startswith("system"):
        systems = parse_systems(text)
        if len(systems) == 1:
            return systems[0]
        if len(systems) == 2:
            return interconnection_from_config(text, path.stem)
        raise ConfigError(f"expected one or two systems, found {len(systems)}")
    xs, ys = _read_table(target)
    return PiecewiseLinearMap(list(zip(xs, ys)))


def _as_map(obj, output=False) -> MultiMap:
    if isinstance(obj, MultiMap):
        return obj
    if isinstance(obj, SystemDef):
        return CharacteristicMap(obj, output=output)
    if isinstance(obj, Interconnection):
        return obj.loop_w()
    raise UsageError(f"cannot use {obj!r} as a map")


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- subcommands -------------------------------------------------------------


def cmd_parse(args):
    text = Path(args.file).read_text(encoding="utf-8")
    systems = parse_systems(text)
    _emit("".join(s.to_config() for s in systems), args.out)
    return 0


def cmd_simulate(args):
    obj = resolve(args.target)
    rtol, atol = _floats(args.tol)
    x0 = _floats(args.x0)
    if isinstance(obj, Interconnection):
        if len(x0) != obj.dimension:
            raise UsageError(f"--x0 needs {obj.dimension} values")
        ts, ys = solve(lambda t, y: obj.rhs(y), 0.0, args.t_final, x0, rtol, atol,
                       lower=obj.lower, upper=obj.upper, max_stride=args.max_stride)
        nx = obj.sys_x.dimension
        head = ["t", *(f"x{i + 1}" for i in range(nx)),
                *(f"z{i + 1}" for i in range(obj.sys_z.dimension)), "w", "y"]
        rows = [",".join(head)]
        for t, y in zip(ts, ys):
            w, v = obj.sys_z.h(y[nx:]), obj.sys_x.h(y[:nx])
            rows.append(",".join(f"{c:.17g}" for c in (t, *y, w, v)))
        _emit("\n".join(rows) + "\n", args.out)
        return 0
    if not isinstance(obj, SystemDef):
        raise UsageError("simulate needs a system or an interconnection")
    if len(x0) != obj.dimension:
        raise UsageError(f"--x0 needs {obj.dimension} values")
    traj = integrate(obj, x0, _input(args.input), args.t_final, rtol, atol, args.max_stride)
    _emit(traj.to_csv(), args.out)
    return 0


def cmd_char(args):
    m = _as_map(resolve(args.target), args.output)
    lo, hi, n = _range(args.u, True)
    prof = cardinality_profile(m, lo, hi, n)
    rows = sample_branches(m, lo, hi, n)
    doc = {"map": repr(m), "range": [lo, hi, n], "profile": prof.to_dict(),
           "branches": [list(r) for r in rows]}
    _emit(dumps(doc), args.out)
    if args.csv:
        Path(args.csv).write_text(branches_csv(rows))
    return 0


def cmd_iterate(args):
    m = _as_map(resolve(args.target))
    starts = _floats(args.w0)
    sets = [iterate_paths(m, w, args.depth, args.cap, args.tol, args.escape) for w in starts]
    _emit(paths_csv(sets), args.out)
    if args.summary:
        summ = classify_grid(m, starts, args.depth, args.tol, args.cap, args.escape)
        Path(args.summary).write_text(dumps(summ.to_dict()))
    return 0


def cmd_fixed_points(args):
    obj = resolve(args.target)
    m = _as_map(obj)
    lo, hi = _range(args.range, False)
    pts = find_fixed_points(m, lo, hi, args.grid, args.tol)
    doc = {"map": repr(m), "range": [lo, hi], "fixed_points": pts,
           "residuals": [membership_residual(m, w) for w in pts]}
    if isinstance(obj, Interconnection):
        doc["attractive_set"] = [p.to_dict() for p in attractive_set(obj, pts)]
    _emit(dumps(doc), args.out)
    return 0


def _grid_counts(text: str) -> tuple[int, ...]:
    try:
        counts = tuple(int(v) for v in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"--grid expects GxH, got {text!r}") from None
    if not counts or min(counts) < 1:
        raise UsageError(f"--grid expects positive counts, got {text!r}")
    return counts


def cmd_verify(args):
    obj = resolve(args.target)
    if isinstance(obj, SystemDef):
        lo, hi, n = _range(args.u, True)
        xlo, xhi, xn = _range(args.x0_grid, True)
        rep = verify_characteristic(obj, list(np.linspace(lo, hi, n)),
                                    [[v] * obj.dimension for v in np.linspace(xlo, xhi, xn)],
                                    t_final=args.t_final or 150.0)
        doc = rep.to_dict()
        doc["verdict"] = rep.status
    elif isinstance(obj, Interconnection):
        extra = {}
        if args.budget:
            try:
                extra = json.loads(args.budget)
            except json.JSONDecodeError as exc:
                raise UsageError(f"--budget is not valid JSON: {exc}") from None
            if not isinstance(extra, dict):
                raise UsageError("--budget must be a JSON object")
        if args.grid:
            extra["grid"] = _grid_counts(args.grid)
        if args.t_final:
            extra["t_final"] = args.t_final
        try:
            budget = Budget.from_dict(extra)
        except (TypeError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        if len(budget.grid) != obj.dimension:
            raise UsageError(f"--grid needs {obj.dimension} counts for {obj.name}")
        rep = verify_hypotheses(obj, budget, fail_fast=args.fail_fast)
        doc = rep.to_dict()
        sys.stdout.write(rep.to_text())
        if args.validate and rep.attractive_set:
            pairs = attractive_set(obj, rep.loop_equilibria)
            val = validate_convergence(obj, obj.start_grid(budget.grid), budget.t_final,
                                       args.dist_tol, pairs, budget.escape_radius)
            doc["validation"] = val.to_dict()
            if not val.passed:
                doc["verdict"] = "fail"
    else:
        raise UsageError("verify needs a system or an interconnection")
    text = dumps(doc)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    elif not isinstance(obj, Interconnection):
        sys.stdout.write(text)
    if doc["verdict"] != "pass":
        raise AnalysisFailure(f"verdict: {doc['verdict']}")
    return 0


def cmd_examples(args):
    entries = builtin_examples()
    if args.json:
        sys.stdout.write(dumps({k: {"kind": e.kind, "description": e.description}
                                for k, e in sorted(entries.items())}))
        return 0
    width = max(map(len, entries))
    for name in sorted(entries):
        e = entries[name]
        sys.stdout.write(f"{name:<{width}}  {e.kind:<15}  {e.description}\n")
    return 0


def cmd_plot(args):
    script = Path(args.script)
    if args.recipe:
        text = RECIPES[args.recipe](script.parent or Path("."), script.stem)
    elif args.artifact:
        text = script_for_artifact(Path(args.artifact))
    else:
        raise UsageError("plot needs an artifact file or --recipe")
    script.write_text(text, encoding="utf-8")
    return 0


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="monosgt", description="Characteristics, discrete inclusions and "
                "small-gain verification for monotone SISO feedback loops.",
                epilog=CONFIG_GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"monosgt {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("parse", help="validate a config file and print it in canonical form")
    s.add_argument("file")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_parse)

    s = sub.add_parser("simulate", help="integrate a system (or closed loop) to CSV")
    s.add_argument("target")
    s.add_argument("--x0", required=True, help="comma-separated initial state")
    s.add_argument("--input", default="const:0", help="const:V | pwc:FILE | sampled:FILE")
    s.add_argument("--t-final", type=float, default=10.0)
    s.add_argument("--tol", default="1e-8,1e-10", help="REL,ABS")
    s.add_argument("--max-stride", type=float, default=None)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_simulate)

    s = sub.add_parser("char", help="cardinality profile and branch samples of a characteristic")
    s.add_argument("target")
    s.add_argument("--u", default="0:6:601", help="LO:HI:N")
    s.add_argument("--output", action="store_true", help="use h(k_x(u)) instead of k_x(u)")
    s.add_argument("--out")
    s.add_argument("--csv", help="also write branches as CSV u,branch_index,value")
    s.set_defaults(fn=cmd_char)

    s = sub.add_parser("iterate", help="enumerate solution sequences of w+ in F(w)")
    s.add_argument("target")
    s.add_argument("--w0", required=True, help="start value(s), comma-separated")
    s.add_argument("--depth", type=int, default=50)
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--cap", type=int, default=10_000)
    s.add_argument("--escape", type=float, default=1e6)
    s.add_argument("--summary", help="write the classification summary JSON here")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_iterate)

    s = sub.add_parser("fixed-points", help="fixed points w in F(w) on a range")
    s.add_argument("target")
    s.add_argument("--range", required=True, help="LO:HI")
    s.add_argument("--grid", type=int, default=201)
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_fixed_points)

    s = sub.add_parser("verify", help="check small-gain hypotheses (or one characteristic)")
    s.add_argument("target")
    s.add_argument("--report")
    s.add_argument("--grid", help="closed-loop start grid, e.g. 5x5")
    s.add_argument("--t-final", type=float, default=None)
    s.add_argument("--budget", help="JSON object overriding budget fields")
    s.add_argument("--validate", action="store_true", help="also simulate the closed loop")
    s.add_argument("--fail-fast", action="store_true", help="stop after a failed condition 1 or 2")
    s.add_argument("--dist-tol", type=float, default=1e-3)
    s.add_argument("--u", default="0:6:7", help="input grid for a single system, LO:HI:N")
    s.add_argument("--x0-grid", default="0:5:20", help="start grid for a single system, LO:HI:N")
    s.set_defaults(fn=cmd_verify)

    s = sub.add_parser("examples", help="list builtin systems, maps and interconnections")
    s.add_argument("--json", action="store_true")
    s.set_defaults(fn=cmd_examples)

    s = sub.add_parser("plot", help="write a gnuplot script (and data files)")
    s.add_argument("artifact", nargs="?")
    s.add_argument("--recipe", choices=sorted(RECIPES))
    s.add_argument("--script", required=True)
    s.set_defaults(fn=cmd_plot)
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (UsageError, ConfigError, ExpressionError, RegistryError, FileNotFoundError,
            IsADirectoryError) as exc:
        sys.stderr.write(f"monosgt {args.command}: {exc}\n")
        if isinstance(exc, UsageError):
            parser.print_usage(sys.stderr)
        return 2
    except (AnalysisFailure, IntegrationError, EvaluationError, MapDomainError,
            DegenerateCharacteristicError, UnsupportedDimensionError, HypothesisViolation) as exc:
        sys.stderr.write(f"monosgt {args.command}: {exc}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
