"""One-prompt attention model, sector projection, reduction equivalence."""

import math

import numpy as np
import pytest

from prodmap.core import step_raw
from prodmap.lsa import (
    Prompt,
    PromptGeometry,
    build_sector_matrix,
    generate_prompt,
    lsa_grad,
    lsa_loss,
    lsa_prediction,
    project_sector,
    run_equivalence,
    sector_coords,
)


def test_generate_prompt_consistency_and_determinism():
    p = generate_prompt(3, 20, seed=5)
    assert p.X.shape == (3, 20) and p.y.shape == (20,)
    assert np.allclose(p.y, p.X.T @ p.w_star, rtol=1e-12)
    assert math.isclose(p.y_q, float(p.x_q @ p.w_star), rel_tol=1e-12)
    q = generate_prompt(3, 20, seed=5)
    assert np.array_equal(p.X, q.X) and np.array_equal(p.x_q, q.x_q)
    assert p.y_q == q.y_q
    assert generate_prompt(3, 20, seed=6).y_q != p.y_q


def test_zero_regressor_prompt():
    p = generate_prompt(2, 6, seed=0)
    z = Prompt(p.d, p.N, p.X, p.x_q, np.zeros(p.d), p.X.T @ np.zeros(p.d), 0.0)
    assert np.all(z.y == 0.0) and z.y_q == 0.0


def test_loss_and_grad_at_zero_matrix():
    p = generate_prompt(3, 10, seed=1)
    U = np.zeros((4, 4))
    assert math.isclose(lsa_loss(U, p), 0.5 * p.y_q ** 2, rel_tol=1e-14)
    assert np.all(lsa_grad(U, p) == 0.0)
    with pytest.raises(ValueError):
        lsa_loss(np.zeros((3, 3)), p)


def test_grad_matches_finite_differences():
    rng = np.random.default_rng(7)
    p = generate_prompt(3, 12, seed=2)
    geom = PromptGeometry.from_prompt(p)
    h = 1e-6
    for _ in range(20):
        U = rng.standard_normal((4, 4)) * 0.5
        G = lsa_grad(U, p, geom)
        for idx in [(0, 0), (1, 3), (3, 3), (2, 1)]:
            Up, Um = U.copy(), U.copy()
            Up[idx] += h
            Um[idx] -= h
            num = (lsa_loss(Up, p, geom) - lsa_loss(Um, p, geom)) / (2 * h)
            assert abs(num - G[idx]) < 1e-6 * max(1.0, abs(G[idx]))


def test_projection_idempotent_and_sector_fixed():
    p = generate_prompt(3, 15, seed=3)
    geom = PromptGeometry.from_prompt(p)
    rng = np.random.default_rng(0)
    U = rng.standard_normal((4, 4))
    P1 = project_sector(U, geom)
    P2 = project_sector(P1, geom)
    assert np.allclose(P1, P2, atol=1e-15)
    S = build_sector_matrix(0.7, -0.4, p, geom)
    assert np.allclose(project_sector(S, geom), S, atol=1e-14)
    I4 = np.eye(4)
    PI = project_sector(I4, geom)
    assert PI[3, 3] == 1.0 and abs(np.linalg.norm(PI[:, :3])) < np.linalg.norm(I4[:, :3])


def test_prediction_identity_on_sector():
    p = generate_prompt(3, 15, seed=4)
    geom = PromptGeometry.from_prompt(p)
    for a0, b0 in [(0.3, 0.9), (-1.1, 0.2), (0.0, 1.0)]:
        U = build_sector_matrix(a0, b0, p, geom)
        sc = sector_coords(U, p, geom, eta=0.01)
        pred = lsa_prediction(U, p, geom)
        assert abs(pred - 2.0 * sc.a * sc.b) <= 1e-12 * max(1.0, abs(pred))
        assert math.isclose(lsa_loss(U, p, geom), 0.5 * (2 * sc.a * sc.b - p.y_q) ** 2,
                            rel_tol=1e-12)


def test_reduced_recurrence_matches_product_map():
    # the lowercase recurrence, rescaled to (A, B), is exactly one map step
    p = generate_prompt(3, 20, seed=8)
    if p.y_q < 0:
        p = p.flipped()
    geom = PromptGeometry.from_prompt(p)
    mu = 0.9
    eta = mu / (2.0 * abs(p.y_q) * math.sqrt(geom.kappa))
    a, b = 0.31, 0.57
    for _ in range(50):
        A, B = 2 * math.sqrt(eta) * a, 2 * math.sqrt(eta * geom.kappa) * b
        E = 2 * a * b - p.y_q
        a, b = a - 2 * eta * geom.kappa * E * b, b - 2 * eta * E * a
        A2, B2 = 2 * math.sqrt(eta) * a, 2 * math.sqrt(eta * geom.kappa) * b
        A3, B3 = step_raw(A, B, mu)
        assert abs(A2 - A3) <= 1e-13 * max(1.0, abs(A3))
        assert abs(B2 - B3) <= 1e-13 * max(1.0, abs(B3))


def test_run_equivalence_short():
    run = run_equivalence(0.9, 60, seed=0)
    assert run.discrepancy[0] == 0.0
    assert run.max_discrepancy <= 1e-12
    assert run.A_red.size == 61


def test_run_equivalence_rejects_bad_mu():
    with pytest.raises(ValueError):
        run_equivalence(-0.5, 10, seed=0)
