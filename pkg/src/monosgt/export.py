"""Serialization helpers and gnuplot recipes."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np


def plain(obj):
    """Convert numpy scalars/arrays, tuples and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(obj) -> str:
    # repr of a float is the shortest string that round-trips, so output is deterministic
    return json.dumps(plain(obj), indent=2, ensure_ascii=False) + "\n"


def branches_csv(rows) -> str:
    lines = ["u,branch_index,value"]
    lines += [f"{u:.17g},{k},{v:.17g}" for u, k, v in rows]
    return "\n".join(lines) + "\n"


def _datablock(name, rows):
    out = [f"${name} << EOD"]
    out += [" ".join(f"{v:.17g}" for v in row) for row in rows]
    out.append("EOD")
    return out


# -- recipes -----------------------------------------------------------------


def _write_dat(path: Path, rows):
    path.write_text("".join(" ".join(f"{v:.17g}" for v in row) + "\n" for row in rows))


def folded_maps(out_dir: Path, stem: str = "folded-maps") -> str:
    """Folded map ABCD and its perturbation ABED (epsilon = 1.5) with the diagonal."""
    from .inclusion import make_zorro

    out_dir = Path(out_dir)
    f0, f1 = make_zorro(0.0), make_zorro(1.5)
    d0, d1 = out_dir / f"{stem}_F.dat", out_dir / f"{stem}_Feps.dat"
    _write_dat(d0, f0.vertices)
    _write_dat(d1, f1.vertices)
    lines = ['set title "F (ABCD) and F_eps, eps = 1.5 (ABED)"', "set size square",
             "set xrange [0:1]", "set yrange [0:1]", "set key top left"]
    for label, (a, b) in zip("ABCD", f0.vertices):
        lines.append(f'set label "{label}" at {a:.6g},{b:.6g} offset 0.6,-0.6')
    a, b = f1.vertices[2]
    lines.append(f'set label "E" at {a:.6g},{b:.6g} offset 0.6,0.6')
    lines.append(f"plot '{d0.name}' with linespoints lw 2 title 'F', \\\n"
                 f"     '{d1.name}' with linespoints lw 2 dt 3 title 'F_eps', \\\n"
                 "     x with lines dt 2 lc rgb 'gray' title 'y = x'")
    return "\n".join(lines) + "\n"


def characteristic_curves(out_dir: Path, stem: str = "characteristics", w_max: float = 4.0) -> str:
    """k1(w), the graph of k2 drawn as (k2(y), y), and R(w) in one (w, y) frame."""
    from .smallgain import R_VERTICES, lookup

    out_dir = Path(out_dir)
    k1 = lookup("k1")
    k2 = lookup("k2")
    ws = np.linspace(0.0, w_max, 401)
    k1_rows = [(w, k1(w)[0]) for w in ws]
    # sweep y and keep every branch so the folds show up
    k2_rows = sorted((z, y) for y in np.linspace(0.0, 8.0, 801) for z in k2(y))
    r_rows = list(R_VERTICES) + [(w_max, R_VERTICES[-1][1])]
    files = {}
    for key, rows in (("k1", k1_rows), ("k2", k2_rows), ("R", r_rows)):
        files[key] = out_dir / f"{stem}_{key}.dat"
        _write_dat(files[key], rows)
    lines = ['set title "characteristics k1, k2 and R"', "set xlabel 'w, z'", "set ylabel 'y'",
             f"set xrange [0:{w_max:g}]", "set yrange [0:8]", "set key bottom right",
             f"plot '{files['k1'].name}' with lines lw 2 title 'k1(w)', \\\n"
             f"     '{files['k2'].name}' with points pt 7 ps 0.3 title 'k2(y)', \\\n"
             f"     '{files['R'].name}' with lines lw 2 dt 4 title 'R(w)'"]
    return "\n".join(lines) + "\n"


RECIPES = {"folded-maps": folded_maps, "characteristics": characteristic_curves}


def script_for_artifact(path: Path) -> str:
    """A gnuplot script that plots an artifact written by another subcommand."""
    path = Path(path)
    text = path.read_text()
    name = path.name
    if path.suffix.lower() == ".json":
        data = json.loads(text)
        if "branches" in data:
            rows = [(u, v) for u, _, v in data["branches"]]
            lines = ['set title "branches"', "set xlabel 'u'", "set ylabel 'value'"]
            for lo, hi, c in data.get("profile", {}).get("intervals", []):
                if c != 1 and hi - lo > 1e-6:
                    lines.append(f"set object rect from {lo:.17g},graph 0 to {hi:.17g},graph 1 "
                                 "fs solid 0.15 noborder")
            lines += _datablock("branches", rows)
            lines.append("plot $branches with points pt 7 ps 0.4 notitle")
            return "\n".join(lines) + "\n"
        if "condition1" in data:
            lines = [f'set title "closed-loop convergence: {data.get("name", "")}"',
                     "set xlabel 'x'", "set ylabel 'z'"]
            pts = [(p["x"][0], z[0]) for p in data.get("attractive_set", []) for z in p["z_set"]]
            lines += _datablock("attr", pts or [(0.0, 0.0)])
            lines.append("plot $attr with points pt 7 ps 2 title 'attractive set'")
            return "\n".join(lines) + "\n"
        raise ValueError(f"{name}: unrecognized JSON artifact")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, [])
    common = ["set datafile separator ','", "set key autotitle columnhead"]
    if header[:1] == ["t"]:
        ncols = len(header)
        plots = [f"'{name}' using 1:{i} with lines" for i in range(2, ncols + 1)
                 if header[i - 1] not in ("u",)]
        return "\n".join(common + ["set xlabel 't'", "plot " + ", \\\n     ".join(plots)]) + "\n"
    if header[:3] == ["u", "branch_index", "value"]:
        return "\n".join(common + ["set xlabel 'u'", "set ylabel 'value'",
                                   f"plot '{name}' using 1:3 with points pt 7 ps 0.4"]) + "\n"
    if header[:3] == ["start", "step", "value"]:
        return "\n".join(common + ["set xlabel 'step'", "set ylabel 'w'", "set key off",
                                   f"plot '{name}' using 2:3:5 with linespoints lc variable"]) + "\n"
    raise ValueError(f"{name}: unrecognized CSV header {','.join(header)!r}")
