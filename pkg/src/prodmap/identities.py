"""Randomized checks of the exact algebraic identities.

Every identity here is exact real algebra, so the only admissible residual is
floating-point rounding.  Residuals are scaled: |x - y| / max(1, |x|, |y|).
The suite is deterministic per seed and is exposed both to pytest and to the
``identity-suite`` CLI subcommand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import balanced, core, minibatch
from .core import MapParams, State
from .rng import STREAM_IDENTITIES, stream


@dataclass
class IdentityCheck:
    name: str
    samples: int
    residual: float      # worst scaled residual (or violation count where noted)
    tol: float
    passed: bool
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        out = f"{status}  {self.name:32s} samples={self.samples:<8d} worst={self.residual:.3e} tol={self.tol:.1e}"
        return out + (f"  [{self.note}]" if self.note else "")


def _scaled(x: float, y: float) -> float:
    return abs(x - y) / max(1.0, abs(x), abs(y))


def _rand_params(rng, n, box=2.5, mu_lo=0.05, mu_hi=1.95):
    a = rng.uniform(-box, box, n)
    b = rng.uniform(-box, box, n)
    mu = rng.uniform(mu_lo, mu_hi, n)
    return a, b, mu


def check_coords_consistency(samples, rng) -> IdentityCheck:
    """e = (u - v)/4 - mu and R - 4 = 4 D / (4 - mu^2)."""
    worst = 0.0
    for a, b, mu in zip(*_rand_params(rng, samples)):
        p = MapParams(mu)
        c = core.coords(State(a, b), p)
        worst = max(worst, _scaled(c.e, (c.u - c.v) / 4.0 - mu))
        worst = max(worst, _scaled(c.R - 4.0, 4.0 * c.D / (4.0 - mu * mu)))
    return IdentityCheck("coords_consistency", samples, worst, 1e-12, worst <= 1e-12)


def check_route_identity(samples, rng) -> IdentityCheck:
    """coords(step(x)) equals step_coords(coords(x)) in all seven components."""
    worst = 0.0
    for a, b, mu in zip(*_rand_params(rng, samples)):
        p = MapParams(mu)
        x = State(a, b)
        direct = core.coords(core.step(x, p), p)
        closed = core.step_coords(core.coords(x, p), p)
        for lhs, rhs in zip(direct, closed):
            worst = max(worst, _scaled(lhs, rhs))
    return IdentityCheck("route_identity", samples, worst, 1e-12, worst <= 1e-12)


def check_gradient_descent_form(samples, rng) -> IdentityCheck:
    """step(x) == x - gradient(x) with identical arithmetic, to 0 ulp."""
    worst = 0.0
    for a, b, mu in zip(*_rand_params(rng, samples, box=3.0)):
        p = MapParams(mu)
        x = State(a, b)
        ga, gb = core.gradient(x, p)
        y = core.step(x, p)
        worst = max(worst, abs(y.a - (a - ga)), abs(y.b - (b - gb)))
    return IdentityCheck("gradient_descent_form", samples, worst, 1e-15, worst <= 1e-15)


def check_sign_invariance(samples, rng) -> IdentityCheck:
    """sign(D') == sign(D) whenever |D| is clearly off the boundary (count)."""
    n = 10 * samples
    a = rng.uniform(-2.5, 2.5, n)
    b = rng.uniform(-2.5, 2.5, n)
    mu = rng.uniform(0.05, 1.95, n)
    e = a * b - mu
    D = (a - b) ** 2 - (2.0 - mu) * (2.0 - e)
    ea = e * b
    eb = e * a
    a2, b2 = a - ea, b - eb
    e2 = a2 * b2 - mu
    D2 = (a2 - b2) ** 2 - (2.0 - mu) * (2.0 - e2)
    keep = np.abs(D) > core.BOUNDARY_TOL
    bad = int(np.sum(np.sign(D2[keep]) != np.sign(D[keep])))
    return IdentityCheck("sign_invariance", n, float(bad), 0.0, bad == 0,
                         note="residual is the violation count")


def check_endpoint_factorizations(samples, rng) -> IdentityCheck:
    """F+mu = (e-1)^2 (e+mu);  2-F = (2-e) q;  2-C = (2-e)(1+e)^2;  2+C = (2+e)(1-e)^2."""
    worst = 0.0
    e = rng.uniform(-4.0, 4.0, samples)
    mu = rng.uniform(0.0, 2.0, samples)
    for ei, mi in zip(e, mu):
        F = balanced.cubic(ei, mi)
        C = ei ** 3 - 3.0 * ei
        worst = max(worst, _scaled(F + mi, (ei - 1.0) ** 2 * (ei + mi)))
        worst = max(worst, _scaled(2.0 - F, (2.0 - ei) * core.q_poly(ei, mi)))
        worst = max(worst, _scaled(2.0 - C, (2.0 - ei) * (1.0 + ei) ** 2))
        worst = max(worst, _scaled(2.0 + C, (2.0 + ei) * (1.0 - ei) ** 2))
        worst = max(worst, _scaled(F, balanced.cubic_factored(ei, mi)))
    return IdentityCheck("endpoint_factorizations", samples, worst, 1e-11, worst <= 1e-11)


def check_ellipse_membership(samples, rng) -> IdentityCheck:
    """Constructed ellipse points have |D| at rounding level, also after 20
    angle-coordinate steps (the numerically faithful route on the ellipse)."""
    worst = 0.0
    n = max(1, samples // 20)
    for _ in range(n):
        mu = rng.uniform(0.05, 1.95)
        p = MapParams(mu)
        e = rng.uniform(-2.0, 2.0)
        st = core.ellipse_state_from_error(e, p, s_sign=rng.choice([-1, 1]),
                                           w_sign=rng.choice([-1, 1]))
        worst = max(worst, abs(core.coords(st, p).D))
        t = rng.uniform(0.0, 2.0 * math.pi)
        for _ in range(20):
            t = core.ellipse_angle_step(t)
            worst = max(worst, abs(core.coords(core.ellipse_state(t, p), p).D))
    return IdentityCheck("ellipse_membership", n, worst, 1e-11, worst <= 1e-11,
                         note="|D| after angle-route steps")


def check_angle_tripling(samples, rng) -> IdentityCheck:
    """One raw map step from an ellipse point with e = 2cos(theta) lands on 2cos(3 theta)."""
    worst = 0.0
    n = max(1, samples // 10)
    for _ in range(n):
        mu = rng.uniform(0.05, 1.95)
        p = MapParams(mu)
        theta = rng.uniform(0.0, math.pi)
        e = 2.0 * math.cos(theta)
        st = core.ellipse_state_from_error(e, p, w_sign=rng.choice([-1, 1]))
        nxt = core.step(st, p)
        e_next = core.coords(nxt, p).e
        worst = max(worst, _scaled(e_next, 2.0 * math.cos(core.cheb_step(theta))))
        worst = max(worst, _scaled(e_next, 2.0 * math.cos(core.cheb_step(core.cheb_angle(e)))))
    return IdentityCheck("angle_tripling", n, worst, 1e-11, worst <= 1e-11)


def check_landing_sets(samples, rng) -> IdentityCheck:
    """Flagged states land on the claimed set after one explicit step."""
    worst = 0.0
    n = max(1, samples // 3)
    for _ in range(n):
        mu = rng.uniform(0.05, 1.95)
        p = MapParams(mu)

        # e = -1 lands on the balanced line
        a = rng.choice([-1, 1]) * rng.uniform(0.2, 2.0)
        st = State(a, (mu - 1.0) / a)
        if not core.landing_set_membership(st, p).lands_on_balanced:
            worst = math.inf
        worst = max(worst, abs(core.coords(core.step(st, p), p).w))

        # e = +1 lands on the anti-balanced line
        a = rng.choice([-1, 1]) * rng.uniform(0.2, 2.0)
        st = State(a, (mu + 1.0) / a)
        if not core.landing_set_membership(st, p).lands_on_antibalanced:
            worst = math.inf
        worst = max(worst, abs(core.coords(core.step(st, p), p).s))

        # D = e^2 - 3 lands on zero error
        e = rng.uniform(2.0, 3.0)
        w2 = e * e - 3.0 + (2.0 - mu) * (2.0 - e)
        w = rng.choice([-1, 1]) * math.sqrt(w2)
        prod = e + mu
        a = (w + math.sqrt(w * w + 4.0 * prod)) / 2.0
        st = State(a, a - w)
        if not core.landing_set_membership(st, p).lands_on_zero_error:
            worst = math.inf
        worst = max(worst, abs(core.coords(core.step(st, p), p).e))
    return IdentityCheck("landing_sets", n, worst, 1e-11, worst <= 1e-11)


def check_jacobian_eigendirections(samples, rng) -> IdentityCheck:
    """On ab = mu: (a,-b) has multiplier 1 and (b,a) multiplier 1 - a^2 - b^2."""
    worst = 0.0
    n = max(1, samples // 10)
    for _ in range(n):
        mu = rng.uniform(0.05, 1.95)
        a = rng.choice([-1, 1]) * rng.uniform(0.3, 3.0)
        b = mu / a
        J = core.jacobian(State(a, b), MapParams(mu))
        t = J @ np.array([a, -b])
        worst = max(worst, _scaled(t[0], a), _scaled(t[1], -b))
        lam = 1.0 - a * a - b * b
        nvec = J @ np.array([b, a])
        worst = max(worst, _scaled(nvec[0], lam * b), _scaled(nvec[1], lam * a))
    return IdentityCheck("jacobian_eigendirections", n, worst, 1e-11, worst <= 1e-11)


def check_perturbation_identity(samples, rng) -> IdentityCheck:
    """Predicted vs direct full-batch D after one off-parameter batch step."""
    worst = 0.0
    for _ in range(samples):
        mu = rng.uniform(0.05, 1.95)
        a = rng.uniform(-2.5, 2.5)
        b = rng.uniform(-2.5, 2.5)
        xi = rng.uniform(-3.0, 3.0)
        chk = minibatch.dmu_after_batch(State(a, b), mu, xi)
        worst = max(worst, _scaled(chk.predicted, chk.direct))
    return IdentityCheck("perturbation_identity", samples, worst, 1e-11, worst <= 1e-11)


def check_moving_separatrix(samples, rng) -> IdentityCheck:
    """Update laws of the batch map's own coordinates, nu in (-2, 2).

    s' = (1-e)s, w' = (1+e)w, D' = q_nu(e) D, 4-R' = q_nu(e)(4-R); and on the
    batch ellipse D_nu = 0 the error triples: e' = e^3 - 3e.
    """
    worst = 0.0
    for _ in range(samples):
        nu = rng.uniform(-1.95, 1.95)
        a = rng.uniform(-2.5, 2.5)
        b = rng.uniform(-2.5, 2.5)
        e = a * b - nu
        s, w = a + b, a - b
        D = w * w - (2.0 - nu) * (2.0 - e)
        R = s * s / (2.0 + nu) + w * w / (2.0 - nu)
        q = core.q_poly(e, nu)
        a2, b2 = core.step_raw(a, b, nu)
        e2 = a2 * b2 - nu
        s2, w2 = a2 + b2, a2 - b2
        D2 = w2 * w2 - (2.0 - nu) * (2.0 - e2)
        R2 = s2 * s2 / (2.0 + nu) + w2 * w2 / (2.0 - nu)
        worst = max(worst, _scaled(s2, (1.0 - e) * s))
        worst = max(worst, _scaled(w2, (1.0 + e) * w))
        worst = max(worst, _scaled(D2, q * D))
        worst = max(worst, _scaled(4.0 - R2, q * (4.0 - R)))
        # point on the batch ellipse
        ee = rng.uniform(-2.0, 2.0)
        se = rng.choice([-1, 1]) * math.sqrt((2.0 + nu) * (ee + 2.0))
        we = rng.choice([-1, 1]) * math.sqrt((2.0 - nu) * (2.0 - ee))
        ae, be = 0.5 * (se + we), 0.5 * (se - we)
        a3, b3 = core.step_raw(ae, be, nu)
        worst = max(worst, _scaled(a3 * b3 - nu, ee ** 3 - 3.0 * ee))
    return IdentityCheck("moving_separatrix", samples, worst, 1e-11, worst <= 1e-11)


def check_cocycle_product(samples, rng) -> IdentityCheck:
    """Accumulated cocycle log-growth equals the transverse component of the
    full 2D linearization along the same parameter sequence.

    The Jacobian at a balanced point multiplies the w-component of ANY tangent
    vector by exactly 1 + r^2 - nu, so the product of recorded multipliers
    must match the accumulated w-growth under the chained Jacobians.  The
    balanced (1,1) component is projected away after each step: it carries no
    transverse information, and left in place its float growth would swamp the
    w-extraction.
    """
    worst = 0.0
    runs = max(1, samples // 1000)
    for _ in range(runs):
        steps = 300
        nus = rng.uniform(0.1, 1.2, steps)
        r = math.sqrt(0.6)
        log_c = 0.0
        v = np.array([0.5, -0.5])
        log_j = 0.0
        for nu in nus:
            log_c += math.log(abs(1.0 + r * r - nu))
            v = core.jacobian(State(r, r), MapParams(nu)) @ v
            d = v[0] - v[1]    # w-component entered the step normalized to 1
            log_j += math.log(abs(d))
            v = np.array([0.5, -0.5]) * math.copysign(1.0, d)
            r = r * (1.0 + nu - r * r)
        worst = max(worst, _scaled(log_c, log_j))
    return IdentityCheck("cocycle_product", runs, worst, 1e-11, worst <= 1e-11,
                         note="log-growth over 300 random-batch steps")


def check_invariant_interval(samples, rng) -> IdentityCheck:
    """F_mu maps [-mu, 2] into itself, up to 1e-12 slack."""
    n = max(1, int(math.isqrt(samples)))
    worst = 0.0
    for _ in range(n):
        mu = rng.uniform(1e-3, 2.0)
        e = rng.uniform(-mu, 2.0, n)
        F = balanced.cubic(e, mu)
        worst = max(worst, float(np.max(-mu - F)), float(np.max(F - 2.0)))
    worst = max(worst, 0.0)
    return IdentityCheck("invariant_interval", n * n, worst, 1e-12, worst <= 1e-12,
                         note="max overshoot beyond [-mu, 2]")


def check_fixed_point_derivative(samples, rng) -> IdentityCheck:
    """F'(0) = 1 - 2 mu, checked by Richardson-extrapolated central differences."""
    worst = 0.0
    n = max(1, samples // 100)
    h = 1e-3
    for _ in range(n):
        mu = rng.uniform(1e-3, 2.0)
        d1 = (balanced.cubic(h, mu) - balanced.cubic(-h, mu)) / (2.0 * h)
        d2 = (balanced.cubic(h / 2.0, mu) - balanced.cubic(-h / 2.0, mu)) / h
        worst = max(worst, _scaled((4.0 * d2 - d1) / 3.0, 1.0 - 2.0 * mu))
    return IdentityCheck("fixed_point_derivative", n, worst, 1e-13, worst <= 1e-13)


def check_sweep_consistency(samples, rng) -> IdentityCheck:
    """Spot columns of the balanced sweep: collapse at mu=0.5, the analytic
    two-cycle at mu=1.1, divergence at mu=2.1."""
    del samples, rng
    cols = balanced.bifurcation_sweep([0.5, 1.1, 2.1], burn_in=2500, keep=600)
    ok = not cols[0].diverged and float(np.max(np.abs(cols[0].recorded_errors))) < 1e-8
    pt = balanced.period_two(1.1)
    d = np.minimum(np.abs(cols[1].recorded_errors - pt.e_plus),
                   np.abs(cols[1].recorded_errors - pt.e_minus))
    ok = ok and not cols[1].diverged and float(d.max()) < 1e-6
    ok = ok and cols[2].diverged
    worst = float(d.max())
    return IdentityCheck("sweep_consistency", 3, worst, 1e-6, ok,
                         note="residual is two-cycle distance at mu=1.1")


def check_balanced_attraction(samples, rng) -> IdentityCheck:
    """Time average of log|1+e| along balanced orbits is <= 1e-3 for
    mu in {1.3, 1.5, 1.9} (transverse attraction of balanced dynamics)."""
    del rng
    steps = max(1000, 10 * samples)
    worst = -math.inf
    for mu in (1.3, 1.5, 1.9):
        r = 0.4 * math.sqrt(mu) + 0.15
        acc = 0.0
        for _ in range(steps):
            e = r * r - mu
            acc += math.log(abs(1.0 + e))
            r = (1.0 - e) * r
        worst = max(worst, acc / steps)
    return IdentityCheck("balanced_attraction", 3 * steps, worst, 1e-3, worst <= 1e-3,
                         note="largest time-average of log|1+e|")


def check_ellipse_repulsion(samples, rng) -> IdentityCheck:
    """Monte-Carlo average of log q_mu(2 cos theta) is strictly positive for
    mu in {0.5, 1.0, 1.5} (uniform theta pushes forward to a tripling-invariant
    error distribution)."""
    n = max(1000, 10 * samples)
    worst = math.inf
    for mu in (0.5, 1.0, 1.5):
        e = 2.0 * np.cos(rng.uniform(0.0, 2.0 * math.pi, n))
        worst = min(worst, float(np.mean(np.log(core.q_poly(e, mu)))))
    return IdentityCheck("ellipse_repulsion", 3 * n, worst, 0.0, worst > 0.0,
                         note="smallest Monte-Carlo transverse exponent; must be > 0")


def check_interior_behavior(samples, rng) -> IdentityCheck:
    """Strict-interior starts at mu in (1, 2) either land on zero error, reach
    the balanced line, or are still contracting toward it; anything else is a
    counterexample (reported, never silently passed)."""
    n_starts = max(20, samples // 100)
    steps = 10_000
    mu = rng.uniform(1.0, 2.0, n_starts)
    # rejection-sample strict-interior, off-axis starts
    a = np.empty(n_starts)
    b = np.empty(n_starts)
    for i in range(n_starts):
        while True:
            x, y = rng.uniform(-2.0, 2.0, 2)
            e = x * y - mu[i]
            D = (x - y) ** 2 - (2.0 - mu[i]) * (2.0 - e)
            if D < -1e-3 and abs(x + y) > 1e-2 and abs(x - y) > 1e-2:
                a[i], b[i] = x, y
                break
    landed = np.zeros(n_starts, dtype=bool)
    w_mid = np.ones(n_starts)
    for k in range(steps):
        e = a * b - mu
        landed |= np.abs(e) < 1e-12
        a, b = a - e * b, b - e * a
        if k == steps // 2:
            w_mid = np.abs(a - b)
    w_final = np.abs(a - b)
    balanced = w_final < 1e-8
    contracting = w_final < w_mid   # still shrinking toward the balanced line
    bad = ~(landed | balanced | contracting)
    return IdentityCheck("interior_no_recurrence", n_starts, float(bad.sum()), 0.0,
                         not bad.any(),
                         note=f"landed={int(landed.sum())} balanced={int(balanced.sum())} "
                              f"slow-contracting={int((~landed & ~balanced & contracting).sum())}")


EXACT_CHECKS = [
    check_coords_consistency,
    check_route_identity,
    check_gradient_descent_form,
    check_sign_invariance,
    check_endpoint_factorizations,
    check_ellipse_membership,
    check_angle_tripling,
    check_landing_sets,
    check_jacobian_eigendirections,
    check_perturbation_identity,
    check_moving_separatrix,
    check_cocycle_product,
    check_invariant_interval,
    check_fixed_point_derivative,
]

MONTE_CARLO_CHECKS = [
    check_sweep_consistency,
    check_balanced_attraction,
    check_ellipse_repulsion,
    check_interior_behavior,
]


def run_identity_suite(samples: int = 10_000, seed: int = 0,
                       include_monte_carlo: bool = True) -> list[IdentityCheck]:
    """Run the identity checks, each on its own sub-stream of ``seed``."""
    results = []
    checks = EXACT_CHECKS + (MONTE_CARLO_CHECKS if include_monte_carlo else [])
    for i, check in enumerate(checks):
        results.append(check(samples, stream(seed, STREAM_IDENTITIES, i)))
    return results
