"""Recorded trajectories with derived coordinates and event flags."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import BOUNDARY_TOL, MapParams, State, coords, is_diverged, step
from .minibatch import batch_step


@dataclass
class OrbitTrace:
    """One recorded trajectory.

    Rows carry the state, all derived coordinates at the trace's mu, the
    region label and event flags.  A trace that escapes is truncated after its
    last finite state with ``diverged`` set; recorded values are always finite.
    """

    mu: float
    states: np.ndarray                 # (k, 2)
    diverged: bool
    landed_zero_error: bool
    crossed_separatrix: bool
    nus: np.ndarray | None = field(default=None, repr=False)   # batched traces only

    def rows(self):
        """Yield CSV rows: step, a, b, e, w, s, u, v, D, R, region, flags."""
        p = MapParams(self.mu)
        prev_sign = None
        for k, (a, b) in enumerate(self.states):
            c = coords(State(float(a), float(b)), p)
            if c.D < -BOUNDARY_TOL:
                region = "interior"
            elif c.D > BOUNDARY_TOL:
                region = "exterior"
            else:
                region = "on_ellipse"
            crossed = int(prev_sign is not None and c.D * prev_sign < 0
                          and abs(c.D) > BOUNDARY_TOL)
            if abs(c.D) > BOUNDARY_TOL:
                prev_sign = 1.0 if c.D > 0 else -1.0
            last = k == len(self.states) - 1
            yield (k, a, b, c.e, c.w, c.s, c.u, c.v, c.D,
                   c.R if c.R is not None else "",
                   region,
                   int(last and self.diverged),
                   int(abs(c.e) < 1e-12),
                   crossed)


CSV_COLUMNS = ("step", "a", "b", "e", "w", "s", "u", "v", "D", "R",
               "region", "diverged", "landed_zero_error", "crossed_separatrix")


def trace_orbit(state0: State, params: MapParams, steps: int) -> OrbitTrace:
    """Iterate the deterministic map, truncating at escape."""
    states = [state0]
    x = state0
    landed = False
    diverged = False
    for _ in range(steps):
        x = step(x, params)
        if is_diverged(x):
            diverged = True
            break
        states.append(x)
        landed = landed or abs(x.a * x.b - params.mu) < 1e-12
    return OrbitTrace(params.mu, np.array(states), diverged, landed, False)


def trace_batch_orbit(state0: State, mu: float, nus: np.ndarray) -> OrbitTrace:
    """Iterate batch maps with given per-step parameters; flags are relative
    to the full-batch mu (separatrix crossings become possible)."""
    states = [state0]
    x = state0
    diverged = False
    landed = False
    crossed = False
    sign0 = None
    for nu in nus:
        x = batch_step(x, float(nu))
        if is_diverged(x):
            diverged = True
            break
        states.append(x)
        e = x.a * x.b - mu
        landed = landed or abs(e) < 1e-12
        D = (x.a - x.b) ** 2 - (2.0 - mu) * (2.0 - e)
        if abs(D) > BOUNDARY_TOL:
            s = 1.0 if D > 0 else -1.0
            crossed = crossed or (sign0 is not None and s != sign0)
            sign0 = s
    n = len(states)
    return OrbitTrace(mu, np.array(states), diverged, landed, crossed, nus[: n - 1])
