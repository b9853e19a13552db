"""Balanced-line scalar dynamics: the cubic family and its phase diagram.

On the balanced line a = b the product map reduces to the scalar cubic

    F_mu(e) = e^3 + (mu-2)e^2 + (1-2mu)e = e*((e+mu)(e-2) + 1)

on the invariant interval [-mu, 2].  The four phase boundaries are exact:
monotone error contraction up to 2*sqrt(2)-2, catapult convergence up to 1,
an attracting two-cycle up to sqrt(5)-1, bounded higher-period/chaotic
dynamics up to 2, divergence beyond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .core import ESCAPE_RADIUS

# Phase boundaries, computed from closed forms at runtime (never hard-coded
# decimals, so classification tests cannot drift).
MU_MONOTONE = 2.0 * math.sqrt(2.0) - 2.0
MU_FLIP = 1.0
MU_TWO_CYCLE_LOSS = math.sqrt(5.0) - 1.0
MU_DIVERGENCE = 2.0


class PhaseLabel(Enum):
    MONOTONE_CONVERGENCE = "monotone_convergence"
    CATAPULT_CONVERGENCE = "catapult_convergence"
    TWO_CYCLE = "two_cycle"
    HIGHER_PERIOD_OR_CHAOS = "higher_period_or_chaos"
    DIVERGENT = "divergent"


def cubic(e, mu):
    """F_mu(e), expanded form. Accepts scalars or arrays."""
    return e ** 3 + (mu - 2.0) * e ** 2 + (1.0 - 2.0 * mu) * e


def cubic_factored(e, mu):
    """F_mu(e) via the factored form e*((e+mu)(e-2)+1); cross-check route."""
    return e * ((e + mu) * (e - 2.0) + 1.0)


def classify_mu(mu: float) -> PhaseLabel:
    """Phase of the balanced dynamics; boundary values go to the lower phase."""
    if not (math.isfinite(mu) and mu > 0):
        raise ValueError(f"mu must be positive, got {mu}")
    if mu <= MU_MONOTONE:
        return PhaseLabel.MONOTONE_CONVERGENCE
    if mu <= MU_FLIP:
        return PhaseLabel.CATAPULT_CONVERGENCE
    if mu <= MU_TWO_CYCLE_LOSS:
        return PhaseLabel.TWO_CYCLE
    if mu <= MU_DIVERGENCE:
        return PhaseLabel.HIGHER_PERIOD_OR_CHAOS
    return PhaseLabel.DIVERGENT


class PeriodTwo(NamedTuple):
    e_plus: float
    e_minus: float
    longitudinal_multiplier: float
    transverse_multiplier: float


def period_two(mu: float) -> PeriodTwo:
    """The first period-two orbit, born at the flip bifurcation mu = 1.

    e_pm = (1 - mu +- sqrt(mu^2 + 2mu - 3)) / 2, with two-step multipliers
    7 - 4mu - 2mu^2 along the balanced line and 3 - 2mu transverse to it.
    """
    if mu < 1.0:
        raise ValueError(f"no real period-two orbit for mu < 1, got {mu}")
    disc = math.sqrt(mu * mu + 2.0 * mu - 3.0)
    e_plus = 0.5 * (1.0 - mu + disc)
    e_minus = 0.5 * (1.0 - mu - disc)
    assert abs(cubic(e_plus, mu) - e_minus) <= 1e-12 * max(1.0, abs(e_minus))
    assert abs(cubic(e_minus, mu) - e_plus) <= 1e-12 * max(1.0, abs(e_plus))
    return PeriodTwo(e_plus, e_minus, 7.0 - 4.0 * mu - 2.0 * mu * mu, 3.0 - 2.0 * mu)


class MonotoneCheck(NamedTuple):
    holds: bool
    worst_e: float


def monotone_check(mu: float, grid_points: int = 20001) -> MonotoneCheck:
    """Scan |F_mu(e)| <= |e| over [-mu, 2] plus the analytic vertex 1 - mu/2.

    ``worst_e`` is the grid point maximizing |F(e)| - |e|.  A 1e-12 slack on
    the margin absorbs rounding exactly at the flip point of the criterion.
    """
    if not (0.0 < mu <= 2.0):
        raise ValueError(f"monotone_check defined for 0 < mu <= 2, got {mu}")
    e = np.linspace(-mu, 2.0, grid_points)
    e = np.append(e, 1.0 - mu / 2.0)
    margin = np.abs(cubic(e, mu)) - np.abs(e)
    i = int(np.argmax(margin))
    return MonotoneCheck(bool(margin[i] <= 1e-12), float(e[i]))


@dataclass
class BifurcationColumn:
    mu: float
    recorded_errors: np.ndarray
    diverged: bool


def bifurcation_sweep(mu_grid: Sequence[float], burn_in: int, keep: int,
                      seed: int = 0) -> list[BifurcationColumn]:
    """Balanced-line sweep: iterate from a0 = b0 = 0.4*sqrt(mu) + 0.15 per mu.

    The balanced constraint w = 0 is enforced by construction (the iteration
    runs on the single factor r with e = r^2 - mu).  A column that leaves the
    escape radius during burn-in or recording is marked divergent.  The sweep
    is deterministic; ``seed`` is carried only for provenance in run records.
    """
    del seed
    if burn_in <= 0 or keep <= 0:
        raise ValueError("burn_in and keep must be positive")
    mu = np.asarray(mu_grid, dtype=float)
    r = 0.4 * np.sqrt(mu) + 0.15
    alive = np.ones(mu.shape, dtype=bool)
    for _ in range(burn_in):
        e = r * r - mu
        r = np.where(alive, (1.0 - e) * r, 0.0)
        alive &= np.abs(r) <= ESCAPE_RADIUS
    recorded = np.zeros((mu.size, keep))
    for k in range(keep):
        e = r * r - mu
        recorded[:, k] = e
        r = np.where(alive, (1.0 - e) * r, 0.0)
        alive &= np.abs(r) <= ESCAPE_RADIUS
    return [
        BifurcationColumn(float(m), recorded[i] if alive[i] else np.empty(0), not alive[i])
        for i, m in enumerate(mu)
    ]


class EtaThresholds(NamedTuple):
    eta_mono: float
    eta_fit: float
    eta_div: float


def eta_thresholds(y_abs: float, c: float) -> EtaThresholds:
    """Learning-rate thresholds for prompt scale |y| and geometry constant c.

    eta_mono = (2*sqrt(2)-2) / (2|y|sqrt(c)),  eta_fit = 1 / (2|y|sqrt(c)),
    eta_div = 1 / (|y|sqrt(c)).
    """
    if y_abs <= 0 or c <= 0:
        raise ValueError("y_abs and c must be positive")
    base = 2.0 * y_abs * math.sqrt(c)
    return EtaThresholds(MU_MONOTONE / base, 1.0 / base, 2.0 / base)
