"""CSV and run-manifest output.

Every CSV starts with a single comment line ``# schema=<id> artifact_version=
<version>`` followed by a header row.  Numeric cells are written with
shortest-round-trip float formatting, so re-running a command with the same
parameters and seed reproduces byte-identical file bodies.  Cells are always
finite numbers, the empty string (undefined R), or the literal token
``diverged``.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .defaults import ARTIFACT_VERSION

OUTDIR_ENV = "PRODMAP_OUTDIR"


def default_outdir() -> Path:
    return Path(os.environ.get(OUTDIR_ENV, "prodmap-out"))


def fmt_cell(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    f = float(x)
    if not math.isfinite(f):
        raise ValueError("refusing to write a non-finite cell")
    return repr(f)


def write_csv(path: Path, schema: str, columns, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema={schema} artifact_version={ARTIFACT_VERSION}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt_cell(x) for x in row) + "\n")
    return path


def read_schema_line(path: Path) -> dict:
    """Parse the schema comment of a CSV written by this package."""
    with open(path) as fh:
        first = fh.readline().strip()
    if not first.startswith("# "):
        raise ValueError(f"{path} has no schema comment")
    return dict(kv.split("=", 1) for kv in first[2:].split())


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int
    artifact_version: str = ARTIFACT_VERSION
    started_at: str = ""
    finished_at: str = ""
    output_files: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    worker_count: int = 1

    def start(self):
        self.started_at = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        return self

    def add_file(self, path: Path):
        self.output_files.append(str(path))

    def note(self, text: str):
        self.notes.append(text)

    def write(self, outdir: Path) -> Path:
        self.finished_at = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        outdir.mkdir(parents=True, exist_ok=True)
        path = outdir / "run_manifest.json"
        with open(path, "w") as fh:
            json.dump(self.__dict__, fh, indent=2, default=str)
            fh.write("\n")
        return path
