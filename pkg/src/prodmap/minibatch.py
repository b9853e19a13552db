"""Mini-batch gradient descent as random switching between product maps.

A batch B of the shared-product losses l_i(a,b) = (gamma_i*a*b - y_i)^2/2
applies the same two-factor map with the batch parameter nu_B = eta * mean of
h_i = gamma_i*y_i over the batch, so mini-batch training switches randomly
within the one-parameter map family.  This module holds the batch populations,
the exact separatrix-perturbation identity, one-step crossing statistics, the
balanced transverse cocycle with its Lyapunov-slope estimator, and the
unreduced multi-prompt attention SGD experiment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import defaults
from .core import ESCAPE_RADIUS, BOUNDARY_TOL, DIVERGED, Diverged, State, q_poly, step_raw
from .lsa import Prompt, PromptGeometry
from .rng import STREAM_COCYCLE, STREAM_CROSSING, STREAM_MULTIPROMPT, stream


@dataclass
class BatchPopulation:
    """Scalar correlations h_i with learning rate eta; mu = eta * mean(h)."""

    h: np.ndarray
    eta: float

    @property
    def n(self) -> int:
        return self.h.size

    @property
    def mu(self) -> float:
        return self.eta * float(self.h.mean())


def sample_truncated_cauchy(rng: np.random.Generator, n: int, scale: float,
                            truncation: float) -> np.ndarray:
    """Symmetric Cauchy draws scaled by ``scale``, resampled past ``truncation``."""
    out = np.empty(n)
    i = 0
    while i < n:
        x = rng.standard_cauchy() * scale
        if abs(x) <= truncation:
            out[i] = x
            i += 1
    return out


def build_population(n: int, target_mu: float, eta: float, scale: float,
                     truncation: float, rng: np.random.Generator,
                     boost_threshold: float | None = None) -> BatchPopulation:
    """Heavy-tailed population shifted to hit ``target_mu`` exactly.

    With ``boost_threshold`` set, the largest-|h| entry is inflated until
    |eta*h| exceeds the threshold and the population is re-shifted to restore
    the mean (iterated until both conditions hold together).
    """
    h = sample_truncated_cauchy(rng, n, scale, truncation)
    h += target_mu / eta - h.mean()
    if boost_threshold is not None:
        j = int(np.argmax(np.abs(h)))
        for _ in range(200):
            while abs(eta * h[j]) <= boost_threshold:
                h[j] *= 1.5
            h += target_mu / eta - h.mean()
            if abs(eta * h[j]) > boost_threshold:
                break
    return BatchPopulation(h, eta)


def crossing_population(seed: int, n: int = defaults.CROSSING_N) -> BatchPopulation:
    """Reference population for the one-step crossing experiment."""
    return build_population(n, defaults.CROSSING_MU, defaults.CROSSING_ETA,
                            defaults.CROSSING_SCALE, defaults.CROSSING_TRUNCATION,
                            stream(seed, STREAM_CROSSING, 0),
                            boost_threshold=defaults.CROSSING_BOOST)


def cocycle_population(seed: int, n: int = defaults.LYAPUNOV_N) -> BatchPopulation:
    """Milder population (no boosted outlier) for the Lyapunov sweep."""
    return build_population(n, defaults.LYAPUNOV_MU, defaults.LYAPUNOV_ETA,
                            defaults.LYAPUNOV_SCALE, defaults.LYAPUNOV_TRUNCATION,
                            stream(seed, STREAM_COCYCLE, 0))


def batch_step(state: State, nu: float) -> State | Diverged:
    """One step of the batch map: the product map with mu replaced by nu."""
    a, b = step_raw(state.a, state.b, nu)
    if not (abs(a) <= ESCAPE_RADIUS and abs(b) <= ESCAPE_RADIUS):
        return DIVERGED
    return State(a, b)


class PerturbationCheck:
    """Predicted vs. directly computed full-batch D after one batch step."""

    __slots__ = ("predicted", "direct")

    def __init__(self, predicted: float, direct: float):
        self.predicted = predicted
        self.direct = direct


def dmu_after_batch(state: State, mu: float, xi: float) -> PerturbationCheck:
    """Exact perturbation of the full-batch separatrix coordinate.

    predicted: D' = q_mu(e) D - xi * [(2e + mu - xi) D + (4 - mu^2)(e - xi)]
    direct:    apply the batch map at nu = mu + xi and recompute D.
    """
    if not (0.0 < mu < 2.0):
        raise ValueError(f"requires 0 < mu < 2, got {mu}")
    a, b = state
    e = a * b - mu
    D = (a - b) ** 2 - (2.0 - mu) * (2.0 - e)
    predicted = q_poly(e, mu) * D - xi * ((2.0 * e + mu - xi) * D + (4.0 - mu * mu) * (e - xi))
    a2, b2 = step_raw(a, b, mu + xi)
    e2 = a2 * b2 - mu
    direct = (a2 - b2) ** 2 - (2.0 - mu) * (2.0 - e2)
    return PerturbationCheck(predicted, direct)


@dataclass
class CrossingResult:
    empirical: float                      # fraction of landings with D_mu > 0
    per_draw_predicate_agreement: float   # closed-form predicate vs direct sign
    boundary_excluded: int                # draws with |D_mu| <= tol, not counted
    landings: np.ndarray = field(repr=False)   # rows: nu, xi, A+, B+, D_mu, predicate, crossed


def crossing_probability(pop: BatchPopulation, m: int, draws: int, seed: int,
                         tol: float = BOUNDARY_TOL) -> CrossingResult:
    """One-step landings from the exact full-batch solution (sqrt(mu), sqrt(mu)).

    Each draw samples a batch of size m without replacement, applies its map
    once, and classifies the landing by the sign of the full-batch D; the
    closed-form crossing predicate mu*(xi^2 + 2*xi) > 2 is evaluated alongside.
    """
    if not (1 <= m <= pop.n):
        raise ValueError(f"batch size {m} out of range 1..{pop.n}")
    mu = pop.mu
    if not (0.0 < mu < 1.0):
        raise ValueError(f"crossing statistics need 0 < mu < 1, got {mu}")
    rng = stream(seed, STREAM_CROSSING, 1, m)
    smu = math.sqrt(mu)
    rows = np.empty((draws, 7))
    crossed = 0
    agree = 0
    excluded = 0
    for i in range(draws):
        idx = rng.choice(pop.n, size=m, replace=False)
        nu = pop.eta * float(pop.h[idx].mean())
        xi = nu - mu
        a2, b2 = step_raw(smu, smu, nu)
        e2 = a2 * b2 - mu
        D = (a2 - b2) ** 2 - (2.0 - mu) * (2.0 - e2)
        pred = mu * (xi * xi + 2.0 * xi) > 2.0
        out = D > 0.0
        crossed += out
        if abs(D) <= tol:
            excluded += 1
            agree += 1
        else:
            agree += pred == out
        rows[i] = (nu, xi, a2, b2, D, pred, out)
    return CrossingResult(crossed / draws, agree / draws, excluded, rows)


# ---------------------------------------------------------------------------
# Balanced transverse cocycle


def draw_batch_parameters(pop: BatchPopulation, m: int, steps: int,
                          rng: np.random.Generator) -> np.ndarray:
    """Per-step batch parameters nu_k for ``steps`` independent batches of size m.

    Batches are drawn without replacement within a batch, independently across
    steps (one row-permutation per step, first m entries taken).
    """
    idx = rng.permuted(np.tile(np.arange(pop.n), (steps, 1)), axis=1)[:, :m]
    return pop.eta * pop.h[idx].mean(axis=1)


@dataclass
class CocycleTrace:
    """Balanced trajectory r_k with accumulated transverse log-growth."""

    r: np.ndarray
    log_dw: np.ndarray
    nus: np.ndarray
    zero_multiplier_steps: list[int]
    diverged_at: int | None


def cocycle_run(pop: BatchPopulation, m: int, steps: int, r0: float,
                seed: int) -> CocycleTrace:
    """Iterate the exact balanced cocycle for one realization.

    r_{k+1} = r_k (1 + nu_k - r_k^2);  delta-w multiplier 1 + r_k^2 - nu_k.
    An exactly zero multiplier kills delta-w (log_dw stays -inf) but the run
    continues; exceeding the escape radius truncates the realization.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    nus = draw_batch_parameters(pop, m, steps, stream(seed, STREAM_COCYCLE, 1, m, 0))
    return _cocycle_kernel(nus, r0)


def _cocycle_kernel(nus: np.ndarray, r0: float) -> CocycleTrace:
    steps = nus.size
    r_tr = np.empty(steps)
    ld_tr = np.empty(steps)
    zeros: list[int] = []
    r = r0
    log_dw = 0.0
    for k in range(steps):
        nu = nus[k]
        mult = 1.0 + r * r - nu
        if mult == 0.0:
            zeros.append(k)
            log_dw = -math.inf
        else:
            log_dw += math.log(abs(mult))
        r = r * (1.0 + nu - r * r)
        r_tr[k] = r
        ld_tr[k] = log_dw
        if abs(r) > ESCAPE_RADIUS:
            return CocycleTrace(r_tr[: k + 1], ld_tr[: k + 1], nus[: k + 1], zeros, k)
    return CocycleTrace(r_tr, ld_tr, nus, zeros, None)


def fit_slope(y: np.ndarray, start: int) -> float:
    """Ordinary least-squares slope of y against its index, from ``start`` on."""
    k = np.arange(start, y.size, dtype=float)
    k -= k.mean()
    seg = y[start:]
    return float((seg - seg.mean()) @ k / (k @ k))


@dataclass
class LyapunovEstimate:
    m: int
    lambda_hat: float            # median slope over realizations
    band: tuple[float, float]    # 10th / 90th percentile of slopes
    slopes: np.ndarray = field(repr=False)
    n_divergent: int = 0
    n_dead: int = 0              # realizations with an exactly-zero multiplier


def sweep_traces(pop: BatchPopulation, m: int, steps: int, realizations: int,
                 seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """log|delta-w| traces for all realizations at one batch size.

    Returns (traces, alive, dead): traces has shape (realizations, steps) and
    freezes where a realization left the escape radius; ``dead`` marks runs
    whose multiplier hit exactly zero.  Realization j draws from the stream
    (seed, cocycle, 1, m, j) regardless of evaluation order.
    """
    nus = np.empty((realizations, steps))
    for j in range(realizations):
        nus[j] = draw_batch_parameters(pop, m, steps, stream(seed, STREAM_COCYCLE, 1, m, j))
    r = np.full(realizations, math.sqrt(pop.mu))
    log_dw = np.zeros(realizations)
    traces = np.empty((realizations, steps))
    alive = np.ones(realizations, dtype=bool)
    dead = np.zeros(realizations, dtype=bool)
    for k in range(steps):
        mult = 1.0 + r * r - nus[:, k]
        dead |= alive & (mult == 0.0)
        with np.errstate(divide="ignore"):
            log_dw = np.where(alive, log_dw + np.log(np.abs(mult)), log_dw)
        traces[:, k] = log_dw
        r = np.where(alive, r * (1.0 + nus[:, k] - r * r), r)
        alive &= np.abs(r) <= ESCAPE_RADIUS
        r = np.where(alive, r, 0.0)
    return traces, alive, dead


def lyapunov_sweep(pop: BatchPopulation, sizes, steps: int, realizations: int,
                   seed: int) -> list[LyapunovEstimate]:
    """Slope of log |delta-w| per batch size, from r0 = sqrt(mu).

    Slopes are fitted on the final half of each run; realizations that diverge
    or whose delta-w dies are excluded from the quantiles and counted.
    """
    out = []
    for m in sizes:
        traces, alive, dead = sweep_traces(pop, m, steps, realizations, seed)
        usable = alive & ~dead
        slopes = np.array([fit_slope(traces[j], steps // 2) for j in range(realizations)
                           if usable[j]])
        if slopes.size:
            lam = float(np.median(slopes))
            band = (float(np.percentile(slopes, 10)), float(np.percentile(slopes, 90)))
        else:
            lam, band = math.nan, (math.nan, math.nan)
        out.append(LyapunovEstimate(m, lam, band, slopes,
                                    int((~alive).sum()), int(dead.sum())))
    return out


# ---------------------------------------------------------------------------
# Unreduced multi-prompt attention SGD


@dataclass
class PromptBatch:
    """Vectorized geometry of n prompts sharing one planted regressor."""

    prompts: list[Prompt]
    G: np.ndarray       # (n, d+1, d+1)
    Xq: np.ndarray      # (n, d+1, d+1)
    y_q: np.ndarray     # (n,)
    kappa: np.ndarray   # (n,)

    @property
    def n(self) -> int:
        return self.y_q.size

    def predictions(self, U: np.ndarray, idx=None):
        G = self.G if idx is None else self.G[idx]
        Xq = self.Xq if idx is None else self.Xq[idx]
        M = np.einsum("nij,jk,nkl->nil", G, U, Xq)
        return np.einsum("il,nil->n", U, M), M

    def population_loss(self, U: np.ndarray) -> float:
        p, _ = self.predictions(U)
        return 0.5 * float(np.mean((p - self.y_q) ** 2))

    def mean_gradient(self, U: np.ndarray, idx) -> np.ndarray:
        p, M = self.predictions(U, idx)
        return np.einsum("n,nij->ij", 2.0 * (p - self.y_q[idx]), M) / len(idx)


def make_prompt_batch(n: int, d: int, N: int, seed: int) -> PromptBatch:
    """Draw n standard-normal prompts with one shared planted regressor."""
    rng = stream(seed, STREAM_MULTIPROMPT, 0)
    w = rng.standard_normal(d)
    prompts = []
    for _ in range(n):
        X = rng.standard_normal((d, N))
        x_q = rng.standard_normal(d)
        prompts.append(Prompt(d, N, X, x_q, w, X.T @ w, float(x_q @ w)))
    geoms = [PromptGeometry.from_prompt(p) for p in prompts]
    return PromptBatch(
        prompts,
        np.stack([g.G for g in geoms]),
        np.stack([p.query_block() for p in prompts]),
        np.array([p.y_q for p in prompts]),
        np.array([g.kappa for g in geoms]),
    )


@dataclass
class SgdTrace:
    m: int
    population_loss: np.ndarray
    reference_residual: np.ndarray
    distance_to_reference: np.ndarray
    diverged: bool


@dataclass
class MultipromptResult:
    eta: float
    mu_values: np.ndarray          # per-prompt step parameters 2*eta*|y_q|*sqrt(kappa)
    loss_floor: float              # population loss at the warm-started reference matrix
    traces: dict[int, SgdTrace]
    fraction_above_1: float
    fraction_above_2: float
    U_star: np.ndarray = field(repr=False)


def multiprompt_sgd(n: int, d: int, N: int, mu_star: float, batch_sizes,
                    steps: int, warm_steps: int, perturb: float,
                    seed: int) -> MultipromptResult:
    """Mini-batch SGD on the full attention matrix over n shared-regressor prompts.

    A reference matrix U* is produced by ``warm_steps`` of small-step
    full-batch descent (step size capped so the worst per-prompt step
    parameter is SGD_WARM_MU_CAP).  The run step size eta makes prompt 0 the
    designated reference with step parameter mu_star.  Each batch size starts
    from U* plus a random perturbation of Frobenius norm ``perturb`` and
    records population loss, the reference-prompt residual, and the distance
    to U*; traces truncate at divergence instead of aborting.
    """
    if not (0.0 < mu_star < 1.0):
        raise ValueError(f"mu_star must lie in (0, 1), got {mu_star}")
    batch = make_prompt_batch(n, d, N, seed)
    scale = 2.0 * np.abs(batch.y_q) * np.sqrt(batch.kappa)
    eta = mu_star / scale[0]
    mu_values = eta * scale

    U = defaults.SGD_INIT_SCALE * stream(seed, STREAM_MULTIPROMPT, 1).standard_normal((d + 1, d + 1))
    eta_warm = defaults.SGD_WARM_MU_CAP / float(scale.max())
    all_idx = np.arange(n)
    for _ in range(warm_steps):
        U = U - eta_warm * batch.mean_gradient(U, all_idx)
    U_star = U

    dxi = stream(seed, STREAM_MULTIPROMPT, 2).standard_normal((d + 1, d + 1))
    dxi *= perturb / np.linalg.norm(dxi)

    traces = {}
    for m in batch_sizes:
        if not (1 <= m <= n):
            raise ValueError(f"batch size {m} out of range 1..{n}")
        rng = stream(seed, STREAM_MULTIPROMPT, 3, m)
        U = U_star + dxi
        losses, residuals, dists = [], [], []
        diverged = False
        for _ in range(steps):
            loss = batch.population_loss(U)
            if not math.isfinite(loss) or loss > defaults.SGD_LOSS_CAP:
                diverged = True
                break
            losses.append(loss)
            pred0, _ = batch.predictions(U, np.array([0]))
            residuals.append(float(pred0[0]) - batch.y_q[0])
            dists.append(float(np.linalg.norm(U - U_star)))
            idx = rng.choice(n, size=m, replace=False) if m < n else all_idx
            U = U - eta * batch.mean_gradient(U, idx)
        traces[m] = SgdTrace(m, np.array(losses), np.array(residuals),
                             np.array(dists), diverged)
    return MultipromptResult(float(eta), mu_values, batch.population_loss(U_star),
                             traces, float(np.mean(mu_values > 1.0)),
                             float(np.mean(mu_values > 2.0)), U_star)
