"""The two-factor product map and its exact coordinate systems.

One gradient-descent step on the bilinear loss l(a, b) = (ab - mu)^2 / 2 at
unit step size is the map

    (a, b)  ->  (a - e*b, b - e*a),        e = a*b - mu.

Everything else in this module is derived algebra for that map: the error /
imbalance coordinates, the signed separatrix coordinate D whose zero set is an
invariant ellipse, the angle coordinate on that ellipse (where the error
evolves by exact angle tripling), and the one-step landing predicates for the
balanced (a = b), anti-balanced (a = -b) and zero-error (ab = mu) sets.

All functions are pure; divergence is reported by the ``DIVERGED`` sentinel
value, never by an exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

# A state is declared escaped well beyond every bounded invariant set (those
# all live inside max(|a|,|b|) <= 2*sqrt(2+mu) <= 4 for mu < 2).
ESCAPE_RADIUS = 1e6

# |D| at or below this is treated as "on the ellipse"; one step multiplies D
# by q_mu(e) <= 11 on the physical range, so classification is stable.
BOUNDARY_TOL = 1e-10


class Diverged:
    """Sentinel replacing a state whose orbit left the escape radius."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "DIVERGED"


DIVERGED = Diverged()


def is_diverged(x) -> bool:
    return isinstance(x, Diverged)


@dataclass(frozen=True)
class MapParams:
    """Effective step-size parameter mu > 0."""

    mu: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ValueError(f"mu must be finite and positive, got {self.mu}")

    @property
    def compact(self) -> bool:
        """True in the compact-ellipse regime 0 < mu < 2."""
        return 0.0 < self.mu < 2.0

    def require_compact(self):
        if not self.compact:
            raise ValueError(f"operation requires 0 < mu < 2, got mu={self.mu}")


class State(NamedTuple):
    a: float
    b: float


class Coords(NamedTuple):
    """Derived coordinates of a state for a given mu.

    e: normalized training error, ab - mu
    w: factor imbalance, a - b
    s: factor sum, a + b
    u: s^2
    v: w^2
    D: signed separatrix coordinate, w^2 - (2-mu)*(2-e)
    R: ellipse quadratic form u/(2+mu) + v/(2-mu); None unless 0 < mu < 2
    """

    e: float
    w: float
    s: float
    u: float
    v: float
    D: float
    R: float | None


class RegionLabel(Enum):
    INTERIOR = "interior"
    ON_ELLIPSE = "on_ellipse"
    EXTERIOR = "exterior"
    UNDEFINED = "undefined"


class LandingFlags(NamedTuple):
    lands_on_balanced: bool
    lands_on_antibalanced: bool
    lands_on_zero_error: bool


def q_poly(e: float, mu: float) -> float:
    """Separatrix multiplier q_mu(e) = e^2 + mu*e + 1."""
    return e * e + mu * e + 1.0


def step_raw(a: float, b: float, mu: float) -> tuple[float, float]:
    """One unchecked map step; shared by the deterministic and batched lanes."""
    e = a * b - mu
    return a - e * b, b - e * a


def step(state: State, params: MapParams) -> State | Diverged:
    """One gradient step; returns DIVERGED past the escape radius."""
    a, b = step_raw(state.a, state.b, params.mu)
    if not (abs(a) <= ESCAPE_RADIUS and abs(b) <= ESCAPE_RADIUS):
        return DIVERGED
    return State(a, b)


def gradient(state: State, params: MapParams) -> tuple[float, float]:
    """Gradient of l(a,b) = (ab-mu)^2/2; step(x) == x - gradient(x) exactly."""
    e = state.a * state.b - params.mu
    return e * state.b, e * state.a


def jacobian(state: State, params: MapParams) -> np.ndarray:
    """Jacobian of the map: [[1-b^2, mu-2ab], [mu-2ab, 1-a^2]]."""
    a, b = state
    off = params.mu - 2.0 * a * b
    return np.array([[1.0 - b * b, off], [off, 1.0 - a * a]])


def coords(state: State, params: MapParams) -> Coords:
    """All derived coordinates at a state; R only in the compact regime."""
    a, b = state
    mu = params.mu
    e = a * b - mu
    w = a - b
    s = a + b
    u = s * s
    v = w * w
    D = v - (2.0 - mu) * (2.0 - e)
    R = u / (2.0 + mu) + v / (2.0 - mu) if params.compact else None
    return Coords(e, w, s, u, v, D, R)


def step_coords(c: Coords, params: MapParams) -> Coords:
    """Advance derived coordinates one step by their closed-form update laws.

    e' = e^3 + (mu-2)e^2 + (1-2mu-w^2)e,  w' = (1+e)w,  s' = (1-e)s,
    u' = (1-e)^2 u,  v' = (1+e)^2 v,  D' = q_mu(e) D,  4-R' = q_mu(e)(4-R).
    """
    mu = params.mu
    e, w, s, u, v, D, R = c
    q = q_poly(e, mu)
    e2 = e * e * e + (mu - 2.0) * e * e + (1.0 - 2.0 * mu - v) * e
    w2 = (1.0 + e) * w
    s2 = (1.0 - e) * s
    u2 = (1.0 - e) ** 2 * u
    v2 = (1.0 + e) ** 2 * v
    D2 = q * D
    R2 = None if R is None else 4.0 - q * (4.0 - R)
    return Coords(e2, w2, s2, u2, v2, D2, R2)


def classify_region(state: State, params: MapParams, tol: float = BOUNDARY_TOL) -> RegionLabel:
    """Side of the invariant ellipse by the sign of D, within tol."""
    if not params.compact:
        return RegionLabel.UNDEFINED
    D = coords(state, params).D
    if D < -tol:
        return RegionLabel.INTERIOR
    if D > tol:
        return RegionLabel.EXTERIOR
    return RegionLabel.ON_ELLIPSE


def landing_set_membership(state: State, params: MapParams, tol: float = BOUNDARY_TOL) -> LandingFlags:
    """One-step landing predicates.

    A point lands on the balanced line iff w = 0 or e = -1; on the
    anti-balanced line iff s = 0 or e = 1; on zero error iff e = 0 or
    D = e^2 - 3.  Equalities are tested within tol.
    """
    c = coords(state, params)
    balanced = abs(c.w) <= tol or abs(c.e + 1.0) <= tol
    anti = abs(c.s) <= tol or abs(c.e - 1.0) <= tol
    zero_err = abs(c.e) <= tol or abs(c.D - (c.e * c.e - 3.0)) <= tol
    return LandingFlags(balanced, anti, zero_err)


# ---------------------------------------------------------------------------
# Chebyshev angle coordinate and the invariant ellipse


def cheb_angle(e: float) -> float:
    """Angle theta in [0, pi] with e = 2*cos(theta); requires |e| <= 2."""
    if abs(e) > 2.0:
        raise ValueError(f"error out of Chebyshev range [-2, 2]: {e}")
    return math.acos(e / 2.0)


def cheb_step(theta: float) -> float:
    """Exact angle tripling mod 2*pi (the error dynamics on the ellipse)."""
    return (3.0 * theta) % (2.0 * math.pi)


def ellipse_semi_axes(params: MapParams) -> tuple[float, float]:
    """Semi-axes of the invariant ellipse along a+b and a-b."""
    params.require_compact()
    mu = params.mu
    return 2.0 * math.sqrt(2.0 + mu), 2.0 * math.sqrt(2.0 - mu)


def ellipse_state(t: float, params: MapParams) -> State:
    """Point of the invariant ellipse at parameter t.

    (s, w) = (2*sqrt(2+mu)*cos t, 2*sqrt(2-mu)*sin t); the error there is
    e = 2*cos(2t).
    """
    sa, wa = ellipse_semi_axes(params)
    s = sa * math.cos(t)
    w = wa * math.sin(t)
    return State(0.5 * (s + w), 0.5 * (s - w))


def ellipse_angle_step(t: float) -> float:
    """The map's action on the ellipse parameter: t -> pi - 3t (mod 2*pi)."""
    return (math.pi - 3.0 * t) % (2.0 * math.pi)


def ellipse_state_from_error(e: float, params: MapParams,
                             s_sign: int = 1, w_sign: int = 1) -> State:
    """Ellipse point with error e in [-2, 2] via u = (2+mu)(e+2), v = (2-mu)(2-e)."""
    params.require_compact()
    if abs(e) > 2.0:
        raise ValueError(f"no ellipse point with error {e}")
    mu = params.mu
    s = s_sign * math.sqrt((2.0 + mu) * (e + 2.0))
    w = w_sign * math.sqrt((2.0 - mu) * (2.0 - e))
    return State(0.5 * (s + w), 0.5 * (s - w))


def hyperbola_points(params: MapParams, a_range: tuple[float, float], n: int) -> np.ndarray:
    """Sample one zero-error branch ab = mu as rows (a, mu/a); a_range must not cross 0."""
    lo, hi = a_range
    if lo == 0.0 or hi == 0.0 or (lo < 0.0) != (hi < 0.0):
        raise ValueError("a_range must stay on one side of a = 0")
    a = np.linspace(lo, hi, n)
    return np.column_stack([a, params.mu / a])


def ellipse_points(params: MapParams, n: int) -> np.ndarray:
    """Sample the full invariant ellipse as rows (a, b)."""
    sa, wa = ellipse_semi_axes(params)
    t = np.linspace(0.0, 2.0 * math.pi, n)
    s = sa * np.cos(t)
    w = wa * np.sin(t)
    return np.column_stack([0.5 * (s + w), 0.5 * (s - w)])
