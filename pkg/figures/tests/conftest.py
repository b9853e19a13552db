"""Reference-run fixture: produce the experiment CSVs through the CLI."""

import subprocess
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

COMMANDS = {
    "g1": ["verify-reduction"],
    "g2": ["bifurcation"],
    "g3": ["phase-portrait"],
    "g4": ["separatrix-crossing"],
    "g5": ["lyapunov"],
    "g6": ["lsa-sgd", "--n", "24", "--d", "3", "--N", "10", "--warm", "1500",
           "--steps", "120"],
}


@pytest.fixture(scope="session")
def reference_run(tmp_path_factory):
    """One CLI run per experiment at reference settings (g6 scaled down)."""
    base = tmp_path_factory.mktemp("reference")
    for fig, cmd in COMMANDS.items():
        out = base / fig
        proc = subprocess.run(
            [sys.executable, "-m", "prodmap.cli", *cmd, "--seed", "0",
             "--out", str(out)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
    return base
