"""Map, coordinates, geometry predicates: frozen examples and properties."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prodmap.core import (
    BOUNDARY_TOL,
    DIVERGED,
    MapParams,
    RegionLabel,
    State,
    cheb_angle,
    cheb_step,
    classify_region,
    coords,
    ellipse_angle_step,
    ellipse_state,
    ellipse_state_from_error,
    gradient,
    hyperbola_points,
    is_diverged,
    jacobian,
    landing_set_membership,
    q_poly,
    step,
    step_coords,
)

MU = st.floats(0.05, 1.95)
COORD = st.floats(-2.5, 2.5)


def test_zero_error_points_are_fixed():
    s = State(math.sqrt(0.5), math.sqrt(0.5))
    out = step(s, MapParams(0.5))
    assert out == s or (abs(out.a - s.a) < 1e-15 and abs(out.b - s.b) < 1e-15)
    assert step(State(0.0, 0.0), MapParams(1.7)) == State(0.0, 0.0)


def test_step_hand_examples():
    assert step(State(1.0, 1.0), MapParams(0.5)) == State(0.5, 0.5)
    assert step(State(2.0, 1.0), MapParams(1.0)) == State(1.0, -1.0)


def test_step_escape_returns_marker():
    out = step(State(1e5, 1e5), MapParams(1.0))
    assert is_diverged(out) and out is DIVERGED


def test_coords_hand_examples():
    c = coords(State(1.0, 1.0), MapParams(0.5))
    assert (c.e, c.w, c.s, c.u, c.v) == (0.5, 0.0, 2.0, 4.0, 0.0)
    assert c.D == -2.25
    c = coords(State(0.0, 0.0), MapParams(1.3))
    assert c.e == -1.3 and c.w == 0.0
    assert math.isclose(c.D, 1.3 ** 2 - 4.0, rel_tol=1e-15)
    c = coords(State(2.0, 1.0), MapParams(1.0))
    assert c.e == 1.0 and c.w == 1.0 and c.D == 0.0
    # cross-check with the ellipse equation itself
    assert math.isclose((2 + 1) ** 2 / 3 + (2 - 1) ** 2 / 1, 4.0)


def test_coords_R_undefined_outside_compact_regime():
    assert coords(State(1.0, 1.0), MapParams(2.0)).R is None
    assert coords(State(1.0, 1.0), MapParams(1.0)).R is not None


def test_gradient_examples_and_descent_form():
    mu = 0.7
    ga, gb = gradient(State(math.sqrt(mu), math.sqrt(mu)), MapParams(mu))
    assert abs(ga) < 1e-15 and abs(gb) < 1e-15
    assert gradient(State(1.0, 1.0), MapParams(0.5)) == (0.5, 0.5)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    h = 1e-6
    for _ in range(100):
        a, b = rng.uniform(-2, 2, 2)
        mu = rng.uniform(0.1, 1.9)
        loss = lambda x, y: 0.5 * (x * y - mu) ** 2
        ga = (loss(a + h, b) - loss(a - h, b)) / (2 * h)
        gb = (loss(a, b + h) - loss(a, b - h)) / (2 * h)
        ea, eb = gradient(State(a, b), MapParams(mu))
        assert abs(ga - ea) < 1e-6 and abs(gb - eb) < 1e-6


def test_jacobian_at_origin_and_on_hyperbola():
    mu = 0.8
    J = jacobian(State(0.0, 0.0), MapParams(mu))
    assert np.array_equal(J, np.array([[1.0, mu], [mu, 1.0]]))
    rng = np.random.default_rng(2)
    for _ in range(50):
        a = rng.choice([-1, 1]) * rng.uniform(0.3, 3.0)
        b = mu / a
        J = jacobian(State(a, b), MapParams(mu))
        t = J @ [a, -b]
        assert np.allclose(t, [a, -b], rtol=1e-12, atol=1e-14)
        n = J @ [b, a]
        lam = 1 - a * a - b * b
        assert np.allclose(n, [lam * b, lam * a], rtol=1e-12, atol=1e-14)


def test_step_coords_hand_example():
    p = MapParams(0.5)
    c = coords(State(1.0, 1.0), p)
    c2 = step_coords(c, p)
    assert math.isclose(c2.D, -3.375, rel_tol=1e-15)          # q(0.5)=1.5 times -2.25
    direct = coords(step(State(1.0, 1.0), p), p)
    for x, y in zip(c2, direct):
        assert math.isclose(x, y, rel_tol=1e-12, abs_tol=1e-12)


def test_step_coords_balanced_and_zero_error_invariance():
    p = MapParams(1.2)
    c = coords(State(0.9, 0.9), p)
    assert step_coords(c, p).w == 0.0
    st0 = State(1.5, 1.2 / 1.5)   # e = 0
    c = coords(st0, p)
    assert abs(c.e) < 1e-16
    c2 = step_coords(c, p)
    assert c2.e == 0.0 and c2.u == c.u and c2.v == c.v


def test_classify_region_examples():
    assert classify_region(State(0.0, 0.0), MapParams(1.0)) is RegionLabel.INTERIOR
    assert classify_region(State(2.0, 1.0), MapParams(1.0)) is RegionLabel.ON_ELLIPSE
    assert classify_region(State(10.0, 10.0), MapParams(1.0)) is RegionLabel.EXTERIOR
    assert classify_region(State(0.0, 0.0), MapParams(2.0)) is RegionLabel.UNDEFINED


def test_landing_examples():
    p = MapParams(0.5)
    st0 = State(1.0, -0.5)   # e = -1
    flags = landing_set_membership(st0, p)
    assert flags.lands_on_balanced
    nxt = step(st0, p)
    assert nxt == State(0.5, 0.5) and coords(nxt, p).w == 0.0

    assert landing_set_membership(State(0.7, -0.7), p).lands_on_antibalanced

    # D = e^2 - 3 at mu = 1: e = 2, w = 1, a = (1 + sqrt(13)) / 2
    a = (1.0 + math.sqrt(13.0)) / 2.0
    st1 = State(a, a - 1.0)
    p1 = MapParams(1.0)
    assert landing_set_membership(st1, p1).lands_on_zero_error
    assert abs(coords(step(st1, p1), p1).e) < 1e-10


def test_cheb_angle_examples():
    assert cheb_angle(2.0) == 0.0
    assert 2.0 * math.cos(cheb_step(0.0)) == 2.0
    th = cheb_angle(1.0)
    assert math.isclose(th, math.pi / 3.0, rel_tol=1e-15)
    assert math.isclose(2.0 * math.cos(cheb_step(th)), -2.0, rel_tol=1e-12)
    assert abs(2.0 * math.cos(cheb_step(cheb_angle(0.0)))) < 1e-12
    with pytest.raises(ValueError):
        cheb_angle(2.0001)


def test_ellipse_construction_and_rejection():
    p = MapParams(1.4)
    for e in (-2.0, -0.3, 0.0, 1.7, 2.0):
        st0 = ellipse_state_from_error(e, p)
        c = coords(st0, p)
        assert abs(c.D) < 1e-13 and math.isclose(c.e, e, rel_tol=0, abs_tol=1e-14)
    with pytest.raises(ValueError):
        ellipse_state_from_error(0.0, MapParams(2.0))
    with pytest.raises(ValueError):
        MapParams(-0.5)


def test_ellipse_angle_route_stays_on_ellipse():
    p = MapParams(0.9)
    t = 0.37
    for _ in range(20):
        t = ellipse_angle_step(t)
        assert abs(coords(ellipse_state(t, p), p).D) < 1e-12


def test_raw_route_drifts_off_ellipse_but_slowly():
    # documents the design decision: raw-coordinate iteration leaves the
    # ellipse at a q-controlled exponential rate, so long-horizon ellipse
    # dynamics must use the angle route
    p = MapParams(0.9)
    x = ellipse_state(0.37, p)
    drift = []
    for _ in range(30):
        x = step(x, p)
        if is_diverged(x):
            break
        drift.append(abs(coords(x, p).D))
    assert drift[0] < 1e-12
    assert max(drift) > drift[0]


def test_hyperbola_points_validation():
    p = MapParams(0.5)
    pts = hyperbola_points(p, (0.1, 3.0), 50)
    assert np.allclose(pts[:, 0] * pts[:, 1], 0.5, rtol=1e-12)
    with pytest.raises(ValueError):
        hyperbola_points(p, (-1.0, 1.0), 10)


@settings(max_examples=200, deadline=None)
@given(COORD, COORD, MU)
def test_route_identity_property(a, b, mu):
    p = MapParams(mu)
    x = State(a, b)
    direct = coords(step(x, p), p)
    closed = step_coords(coords(x, p), p)
    for lhs, rhs in zip(direct, closed):
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), abs(rhs))


@settings(max_examples=200, deadline=None)
@given(COORD, COORD, MU)
def test_sign_invariance_property(a, b, mu):
    p = MapParams(mu)
    D = coords(State(a, b), p).D
    nxt = step(State(a, b), p)
    if abs(D) > BOUNDARY_TOL and not is_diverged(nxt):
        assert coords(nxt, p).D * D > 0


@settings(max_examples=200, deadline=None)
@given(COORD, COORD, MU)
def test_descent_form_property(a, b, mu):
    p = MapParams(mu)
    ga, gb = gradient(State(a, b), p)
    nxt = step(State(a, b), p)
    if not is_diverged(nxt):
        assert nxt.a == a - ga and nxt.b == b - gb


@settings(max_examples=100, deadline=None)
@given(st.floats(-2.0, 2.0), MU)
def test_q_multiplier_positive_in_compact_regime(e, mu):
    assert q_poly(e, mu) > 0.0
