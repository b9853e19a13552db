"""Balanced-line cubic family: thresholds, cycles, sweep."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prodmap.balanced import (
    MU_DIVERGENCE,
    MU_FLIP,
    MU_MONOTONE,
    MU_TWO_CYCLE_LOSS,
    PhaseLabel,
    bifurcation_sweep,
    classify_mu,
    cubic,
    cubic_factored,
    eta_thresholds,
    monotone_check,
    period_two,
)


def test_cubic_fixed_points():
    for mu in (0.3, 1.0, 1.7):
        assert cubic(0.0, mu) == 0.0
        assert math.isclose(cubic(-mu, mu), -mu, rel_tol=1e-14)
        assert math.isclose(cubic(2.0, mu), 2.0, rel_tol=1e-14)
    assert cubic(1.0, 0.5) == -0.5


@settings(max_examples=300, deadline=None)
@given(st.floats(-4, 4), st.floats(0, 2))
def test_cubic_forms_agree(e, mu):
    x, y = cubic(e, mu), cubic_factored(e, mu)
    assert abs(x - y) <= 1e-13 * max(1.0, abs(x), abs(y))


def test_classification_examples_and_boundaries():
    assert classify_mu(0.5) is PhaseLabel.MONOTONE_CONVERGENCE
    assert classify_mu(0.9) is PhaseLabel.CATAPULT_CONVERGENCE
    assert classify_mu(1.1) is PhaseLabel.TWO_CYCLE
    assert classify_mu(1.5) is PhaseLabel.HIGHER_PERIOD_OR_CHAOS
    assert classify_mu(2.5) is PhaseLabel.DIVERGENT
    # boundary values belong to the lower phase
    assert classify_mu(MU_MONOTONE) is PhaseLabel.MONOTONE_CONVERGENCE
    assert classify_mu(MU_FLIP) is PhaseLabel.CATAPULT_CONVERGENCE
    assert classify_mu(MU_TWO_CYCLE_LOSS) is PhaseLabel.TWO_CYCLE
    assert classify_mu(MU_DIVERGENCE) is PhaseLabel.HIGHER_PERIOD_OR_CHAOS
    assert math.isclose(MU_MONOTONE, 0.8284271247461903)
    with pytest.raises(ValueError):
        classify_mu(0.0)


def test_period_two_examples():
    pt = period_two(1.0)
    assert pt.e_plus == pt.e_minus == 0.0
    assert pt.longitudinal_multiplier == 1.0 and pt.transverse_multiplier == 1.0
    pt = period_two(1.5)
    assert math.isclose(pt.e_plus, 0.5, abs_tol=1e-15)
    assert math.isclose(pt.e_minus, -1.0, abs_tol=1e-15)
    assert pt.longitudinal_multiplier == -3.5 and pt.transverse_multiplier == 0.0
    assert math.isclose(cubic(0.5, 1.5), -1.0, abs_tol=1e-15)
    assert math.isclose(period_two(1.1).longitudinal_multiplier, 0.18, abs_tol=1e-14)
    with pytest.raises(ValueError):
        period_two(0.99)


@settings(max_examples=200, deadline=None)
@given(st.floats(1.0, 1.99))
def test_period_two_exchange_and_multiplier_routes(mu):
    pt = period_two(mu)
    assert abs(cubic(pt.e_plus, mu) - pt.e_minus) < 1e-12
    assert abs(cubic(pt.e_minus, mu) - pt.e_plus) < 1e-12
    dF = lambda e: 3 * e * e + 2 * (mu - 2) * e + (1 - 2 * mu)
    assert abs(dF(pt.e_plus) * dF(pt.e_minus) - pt.longitudinal_multiplier) < 1e-12
    assert abs((1 + pt.e_plus) * (1 + pt.e_minus) - pt.transverse_multiplier) < 1e-12


def test_monotone_check_examples():
    assert monotone_check(0.8).holds
    chk = monotone_check(0.83)
    assert not chk.holds
    assert abs(chk.worst_e - (1.0 - 0.83 / 2.0)) < 5e-3
    chk = monotone_check(2.0)
    assert not chk.holds
    assert abs(cubic(chk.worst_e, 2.0)) > abs(chk.worst_e)
    assert abs(cubic(0.5, 2.0)) > 0.5  # any e in (0, 1) witnesses the failure
    with pytest.raises(ValueError):
        monotone_check(2.5)


def test_bifurcation_sweep_examples():
    cols = bifurcation_sweep([0.5, 1.1, 2.1], burn_in=2500, keep=600)
    c05, c11, c21 = cols
    assert not c05.diverged and np.max(np.abs(c05.recorded_errors)) < 1e-8
    pt = period_two(1.1)
    d = np.minimum(np.abs(c11.recorded_errors - pt.e_plus),
                   np.abs(c11.recorded_errors - pt.e_minus))
    assert not c11.diverged and d.max() < 1e-6
    assert c21.diverged and c21.recorded_errors.size == 0


def test_bifurcation_recorded_errors_stay_in_invariant_interval():
    rng = np.random.default_rng(3)
    mus = rng.uniform(0.01, 2.0, 40)
    for col in bifurcation_sweep(mus, burn_in=300, keep=100):
        if not col.diverged:
            assert np.all(col.recorded_errors >= -col.mu - 1e-9)
            assert np.all(col.recorded_errors <= 2.0 + 1e-9)


def test_bifurcation_sweep_argument_validation():
    with pytest.raises(ValueError):
        bifurcation_sweep([0.5], burn_in=0, keep=10)


def test_eta_thresholds():
    t = eta_thresholds(1.0, 1.0)
    assert math.isclose(t.eta_mono, math.sqrt(2.0) - 1.0, rel_tol=1e-15)
    assert t.eta_fit == 0.5 and t.eta_div == 1.0
    assert t.eta_mono < t.eta_fit < t.eta_div
    double = eta_thresholds(2.0, 1.0)
    assert np.allclose([t.eta_mono / 2, t.eta_fit / 2, t.eta_div / 2], list(double))
    t4 = eta_thresholds(1.0, 4.0)
    assert math.isclose(t4.eta_mono, MU_MONOTONE / 4.0)
    assert t4.eta_fit == 0.25 and t4.eta_div == 0.5
    with pytest.raises(ValueError):
        eta_thresholds(0.0, 1.0)
