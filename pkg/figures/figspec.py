"""Figure specifications and CSV loading for the rendering script.

The renderer consumes only the experiment CLI's CSV/JSON files.  Each figure
declares the CSVs it needs and the schema id it expects in their header
comment; a mismatch refuses to render.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class SchemaError(RuntimeError):
    pass


def read_table(path: Path, expect_schema: str) -> dict:
    """Load one CSV into a dict of column -> list, validating the schema line."""
    with open(path) as fh:
        head = fh.readline().strip()
        if not head.startswith("# "):
            raise SchemaError(f"{path}: missing schema comment")
        meta = dict(kv.split("=", 1) for kv in head[2:].split())
        if meta.get("schema") != expect_schema:
            raise SchemaError(f"{path}: schema {meta.get('schema')!r}, "
                              f"expected {expect_schema!r}")
        reader = csv.reader(fh)
        columns = next(reader)
        data = {c: [] for c in columns}
        for row in reader:
            for c, cell in zip(columns, row):
                data[c].append(cell)
    return data


def numeric(table: dict, column: str) -> np.ndarray:
    """Column as float array; empty cells and 'diverged' become NaN."""
    out = []
    for cell in table[column]:
        out.append(float(cell) if cell not in ("", "diverged") else np.nan)
    return np.array(out)


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    title: str
    # (glob pattern, schema id) pairs; every pattern must match at least once
    inputs: tuple


FIGURES = {
    "g1": FigureSpec("g1", "reduced map vs sector-projected attention descent",
                     ((r"reduction_mu*.csv", "reduction-trajectory/1"),
                      ("reduction_summary.csv", "reduction-summary/1"))),
    "g2": FigureSpec("g2", "balanced-line bifurcation diagram",
                     (("bifurcation_points.csv", "bifurcation-points/1"),
                      ("bifurcation_divergence.csv", "bifurcation-divergence/1"),
                      ("bifurcation_thresholds.csv", "bifurcation-thresholds/1"))),
    "g3": FigureSpec("g3", "phase portraits around the invariant ellipse",
                     (("portrait_curves_mu*.csv", "curve/1"),
                      ("portrait_orbit_mu*.csv", "orbit-trace/1"))),
    "g4": FigureSpec("g4", "one-step separatrix crossings by mini-batches",
                     (("crossing_traj_m*.csv", "orbit-trace/1"),
                      ("crossing_landings.csv", "crossing-landings/1"))),
    "g5": FigureSpec("g5", "transverse exponent versus batch size",
                     (("lyapunov_curves.csv", "lyapunov-curves/1"),
                      ("lyapunov_summary.csv", "lyapunov-summary/1"))),
    "g6": FigureSpec("g6", "multi-prompt mini-batch training diagnostics",
                     (("sgd_diagnostics.csv", "sgd-diagnostics/1"),
                      ("sgd_mu_values.csv", "sgd-mu-values/1"))),
}


def resolve_inputs(spec: FigureSpec, input_dir: Path) -> dict:
    """Map each pattern to its validated tables; raise if anything is missing."""
    tables = {}
    for pattern, schema in spec.inputs:
        paths = sorted(input_dir.glob(pattern))
        if not paths:
            raise FileNotFoundError(f"{input_dir}: no file matches {pattern!r}")
        tables[pattern] = [(p, read_table(p, schema)) for p in paths]
    return tables
