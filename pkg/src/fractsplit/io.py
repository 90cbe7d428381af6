"""CSV emission with JSON metadata sidecars.

Every CSV ``name.csv`` is accompanied by ``name.csv.meta.json`` holding the
config hash, root seed, RNG algorithm tag and ``git describe`` string. No
timestamps are written, so identical runs give identical bytes.
"""

from __future__ import annotations

import json
import os
import subprocess
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import IoError
from .grid import Grid1D, ScalarField
from .stochastic import RNG_ALGORITHM

FIELD_HEADER = "x,u"
STATS_HEADER = "t,mean_linf,max_linf,mean_tv,stderr_tv"
CONVERGENCE_HEADER = "dx,dt,l1_error"


def _fmt(x: float) -> str:
    # 17 significant digits round-trip any double
    return format(float(x), ".16e")


@lru_cache(maxsize=1)
def git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True, text=True,
                             timeout=10, cwd=os.path.dirname(os.path.abspath(__file__)))
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    desc = out.stdout.strip()
    return desc if out.returncode == 0 and desc else "unknown"


def _write_text(path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def write_metadata(csv_path, config_hash: Optional[str] = None, seed: Optional[int] = None,
                   extra: Optional[dict] = None) -> Path:
    meta = {
        "config_hash": config_hash,
        "root_seed": seed,
        "rng_algorithm": RNG_ALGORITHM,
        "git_describe": git_describe(),
    }
    if extra:
        meta.update(extra)
    return _write_text(str(csv_path) + ".meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _emit(path, header: str, rows, meta: dict) -> Path:
    lines = [header] + [",".join(_fmt(v) for v in row) for row in rows]
    out = _write_text(path, "\n".join(lines) + "\n")
    write_metadata(out, **meta)
    return out


def emit_field_csv(field: ScalarField, grid: Optional[Grid1D], path, config_hash=None, seed=None,
                   extra=None) -> Path:
    if grid is None:
        grid = field.grid
    field.check_grid(grid)
    return _emit(path, FIELD_HEADER, zip(grid.cell_centers, field.values),
                 {"config_hash": config_hash, "seed": seed, "extra": extra})


def emit_stats_csv(stats, path, config_hash=None, seed=None, extra=None) -> Path:
    cols = (stats.times, stats.mean_linf, stats.max_linf, stats.mean_tv, stats.stderr_tv)
    seed = stats.root_seed if seed is None else seed
    return _emit(path, STATS_HEADER, zip(*cols), {"config_hash": config_hash, "seed": seed, "extra": extra})


def emit_convergence_csv(report, path, config_hash=None, seed=None, extra=None) -> Path:
    return _emit(path, CONVERGENCE_HEADER, zip(report.dx, report.dt, report.l1_error),
                 {"config_hash": config_hash, "seed": seed, "extra": extra})


def read_csv(path):
    """Return ``(header_columns, data)`` for a CSV written by this module."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


GNUPLOT_TEMPLATE = """\
set datafile separator ","
set key autotitle columnhead
set terminal pngcairo size 900,600
set output "{prefix}final.png"
set xlabel "x"
set ylabel "mean u(T, x)"
plot "{prefix}final.csv" using 1:2 with lines
set output "{prefix}stats.png"
set xlabel "t"
set ylabel "value"
plot "{prefix}stats.csv" using 1:2 with lines title "mean |u|_inf", \\
     "" using 1:4 with lines title "mean TV", \\
     "" using 1:($4-2*$5):($4+2*$5) with filledcurves fs transparent solid 0.2 notitle
"""


def emit_gnuplot_script(out_dir, prefix: str = "") -> Path:
    return _write_text(Path(out_dir) / f"{prefix}plot.gp", GNUPLOT_TEMPLATE.format(prefix=prefix))
