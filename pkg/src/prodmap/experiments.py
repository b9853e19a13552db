"""Experiment drivers behind the CLI subcommands.

Each driver resolves its parameters, runs the computation, writes CSV tables
plus a JSON run manifest into the output directory, and returns a process
exit code (0 = all assertions passed, 1 = an assertion failed).
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from . import balanced, defaults, identities, minibatch
from .core import MapParams, State
from .lsa import run_equivalence
from .orbits import CSV_COLUMNS, trace_batch_orbit, trace_orbit
from .rng import STREAM_CROSSING, stream
from .runio import RunManifest, write_csv
from .core import ellipse_points, hyperbola_points


def _mu_tag(mu: float) -> str:
    return f"{mu:g}".replace(".", "p").replace("-", "m")


def parse_batch_size(token, n: int) -> int:
    if isinstance(token, int):
        return token
    if token in ("full", "n"):
        return n
    return int(token)


def cmd_verify_reduction(mus, steps, seed, outdir: Path,
                         tol: float = defaults.REDUCTION_TOL) -> int:
    man = RunManifest("verify-reduction",
                      {"mu": list(mus), "steps": steps, "tol": tol}, seed).start()
    summary = []
    ok = True
    for mu in mus:
        run = run_equivalence(mu, steps, seed)
        rows = zip(range(steps + 1), run.A_red, run.B_red, run.A_lsa, run.B_lsa,
                   np.abs(run.A_red * run.B_red - mu),
                   np.abs(run.A_lsa * run.B_lsa - mu),
                   run.discrepancy)
        path = outdir / f"reduction_mu{_mu_tag(mu)}.csv"
        write_csv(path, "reduction-trajectory/1",
                  ("step", "A_red", "B_red", "A_lsa", "B_lsa",
                   "abs_err_red", "abs_err_lsa", "discrepancy"), rows)
        man.add_file(path)
        passed = run.max_discrepancy <= tol
        ok &= passed
        summary.append((mu, run.max_discrepancy, run.eta, run.resampled, int(passed)))
        if run.resampled:
            man.note(f"mu={mu}: resampled {run.resampled} degenerate prompt(s)")
        man.note(f"mu={mu}: transverse_ratio={run.transverse_ratio:.3e}")
    path = outdir / "reduction_summary.csv"
    write_csv(path, "reduction-summary/1",
              ("mu", "max_discrepancy", "eta", "resampled_prompts", "passed"), summary)
    man.add_file(path)
    man.write(outdir)
    return 0 if ok else 1


def cmd_bifurcation(grid, mu_range, burn_in, keep, seed, outdir: Path) -> int:
    man = RunManifest("bifurcation",
                      {"grid": grid, "range": list(mu_range),
                       "burn_in": burn_in, "keep": keep}, seed).start()
    mu_grid = np.linspace(mu_range[0], mu_range[1], grid)
    cols = balanced.bifurcation_sweep(mu_grid, burn_in, keep, seed)

    def point_rows():
        for c in cols:
            for e in c.recorded_errors:
                yield (c.mu, e)

    p1 = write_csv(outdir / "bifurcation_points.csv", "bifurcation-points/1",
                   ("mu", "e"), point_rows())
    p2 = write_csv(outdir / "bifurcation_divergence.csv", "bifurcation-divergence/1",
                   ("mu", "diverged"), ((c.mu, int(c.diverged)) for c in cols))
    p3 = write_csv(outdir / "bifurcation_thresholds.csv", "bifurcation-thresholds/1",
                   ("name", "mu"),
                   (("monotone_to_catapult", balanced.MU_MONOTONE),
                    ("catapult_to_two_cycle", balanced.MU_FLIP),
                    ("two_cycle_to_higher_period", balanced.MU_TWO_CYCLE_LOSS),
                    ("bounded_to_divergent", balanced.MU_DIVERGENCE)))
    for p in (p1, p2, p3):
        man.add_file(p)
    man.note(f"divergent columns: {sum(c.diverged for c in cols)}")
    man.write(outdir)
    return 0


def cmd_phase_portrait(mus, steps, seed, outdir: Path,
                       interior=defaults.PORTRAIT_INTERIOR,
                       exterior=defaults.PORTRAIT_EXTERIOR) -> int:
    man = RunManifest("phase-portrait",
                      {"mu": list(mus), "steps": steps,
                       "interior": [list(s) for s in interior],
                       "exterior": [list(s) for s in exterior]}, seed).start()
    for mu in mus:
        params = MapParams(mu)
        tag = _mu_tag(mu)

        def curve_rows():
            lim = 2.0 * math.sqrt(2.0 + mu) + 1.0
            for branch, (lo, hi) in (("positive", (mu / lim, lim)),
                                     ("negative", (-lim, -mu / lim))):
                for a, b in hyperbola_points(params, (lo, hi), 400):
                    yield ("hyperbola", branch, a, b)
            for a, b in ellipse_points(params, 720):
                yield ("ellipse", "closed", a, b)

        p = write_csv(outdir / f"portrait_curves_mu{tag}.csv", "curve/1",
                      ("curve", "branch", "a", "b"), curve_rows())
        man.add_file(p)
        # two interior seeds (A, B) then two exterior seeds (C, D)
        seeds = [(label, s) for label, s in zip("AB", interior)] + \
                [(label, s) for label, s in zip("CD", exterior)]
        for label, (a0, b0) in seeds:
            tr = trace_orbit(State(a0, b0), params, steps)
            p = write_csv(outdir / f"portrait_orbit_mu{tag}_{label}.csv",
                          "orbit-trace/1", CSV_COLUMNS, tr.rows())
            man.add_file(p)
            man.note(f"mu={mu} seed {label} ({a0},{b0}): "
                     f"{'diverged' if tr.diverged else f'{len(tr.states) - 1} steps'}")
    man.write(outdir)
    return 0


def cmd_separatrix_crossing(n, m_list, traj_steps, draws, seed, outdir: Path,
                            epsilon: float = defaults.CROSSING_EPSILON) -> int:
    man = RunManifest("separatrix-crossing",
                      {"n": n, "m_list": list(m_list), "traj_steps": traj_steps,
                       "draws": draws, "epsilon": epsilon,
                       "mu": defaults.CROSSING_MU, "eta": defaults.CROSSING_ETA,
                       "scale": defaults.CROSSING_SCALE,
                       "truncation": defaults.CROSSING_TRUNCATION,
                       "boost": defaults.CROSSING_BOOST}, seed).start()
    pop = minibatch.crossing_population(seed, n)
    mu = pop.mu
    sizes = [parse_batch_size(m, n) for m in m_list]
    smu = math.sqrt(mu)
    x0 = State(smu + epsilon, smu - epsilon)
    landing_rows = []
    fractions = {}
    ok = True
    for m in sizes:
        nus = minibatch.draw_batch_parameters(
            pop, m, traj_steps, stream(seed, STREAM_CROSSING, 2, m))
        tr = trace_batch_orbit(x0, mu, nus)
        p = write_csv(outdir / f"crossing_traj_m{m}.csv", "orbit-trace/1",
                      CSV_COLUMNS, tr.rows())
        man.add_file(p)
        res = minibatch.crossing_probability(pop, m, draws, seed)
        fractions[m] = res.empirical
        ok &= res.per_draw_predicate_agreement >= 1.0 - 1e-6
        for i, (nu, xi, a2, b2, D, pred, crossed) in enumerate(res.landings):
            landing_rows.append((m, i, nu, xi, a2, b2, D, int(pred), int(crossed)))
        man.note(f"m={m}: exit_fraction={res.empirical:.6f} "
                 f"agreement={res.per_draw_predicate_agreement:.8f} "
                 f"boundary_excluded={res.boundary_excluded}")
    p = write_csv(outdir / "crossing_landings.csv", "crossing-landings/1",
                  ("m", "draw", "nu", "xi", "A_plus", "B_plus", "D_mu",
                   "predicate", "crossed"), landing_rows)
    man.add_file(p)
    man.note(f"population mu={mu!r} max|eta*h|={float(np.max(np.abs(pop.eta * pop.h)))!r}")
    man.write(outdir)
    return 0 if ok else 1


def cmd_lyapunov(sizes, steps, realizations, seed, outdir: Path, n=defaults.LYAPUNOV_N) -> int:
    man = RunManifest("lyapunov",
                      {"sizes": list(sizes), "steps": steps,
                       "realizations": realizations, "n": n,
                       "mu": defaults.LYAPUNOV_MU, "scale": defaults.LYAPUNOV_SCALE,
                       "truncation": defaults.LYAPUNOV_TRUNCATION}, seed).start()
    pop = minibatch.cocycle_population(seed, n)
    msizes = [parse_batch_size(m, n) for m in sizes]
    estimates = []
    rows = []
    thin = max(1, steps // 150)
    for m in msizes:
        traces, alive, dead = minibatch.sweep_traces(pop, m, steps, realizations, seed)
        usable = alive & ~dead
        slopes = np.array([minibatch.fit_slope(traces[j], steps // 2)
                           for j in range(realizations) if usable[j]])
        if slopes.size:
            est = minibatch.LyapunovEstimate(
                m, float(np.median(slopes)),
                (float(np.percentile(slopes, 10)), float(np.percentile(slopes, 90))),
                slopes, int((~alive).sum()), int(dead.sum()))
        else:
            est = minibatch.LyapunovEstimate(m, math.nan, (math.nan, math.nan),
                                             slopes, int((~alive).sum()), int(dead.sum()))
        estimates.append(est)
        fin = traces[usable]
        for k in range(0, steps, thin):
            rows.append((m, k, float(np.percentile(fin[:, k], 10)),
                         float(np.percentile(fin[:, k], 50)),
                         float(np.percentile(fin[:, k], 90))))
    p = write_csv(outdir / "lyapunov_curves.csv", "lyapunov-curves/1",
                  ("m", "step", "p10", "p50", "p90"), rows)
    man.add_file(p)

    p = write_csv(outdir / "lyapunov_summary.csv", "lyapunov-summary/1",
                  ("m", "lambda_hat", "p10", "p90", "realizations_used",
                   "n_divergent", "n_dead"),
                  ((e.m, e.lambda_hat, e.band[0], e.band[1], e.slopes.size,
                    e.n_divergent, e.n_dead) for e in estimates))
    man.add_file(p)
    lams = [e.lambda_hat for e in estimates]
    man.note(f"lambda_hat by size: {dict(zip(msizes, [round(l, 6) for l in lams]))}")
    trend = all(lams[i] >= lams[i + 1] or estimates[i].band[0] <= estimates[i + 1].band[1]
                for i in range(len(lams) - 1))
    man.note(f"non-increasing up to band overlap: {trend}")
    man.write(outdir)
    return 0


def cmd_lsa_sgd(n, d, N, mu_star, m_list, steps, warm, perturb, seed, outdir: Path) -> int:
    man = RunManifest("lsa-sgd",
                      {"n": n, "d": d, "N": N, "mu_star": mu_star,
                       "m_list": list(m_list), "steps": steps, "warm": warm,
                       "perturb": perturb}, seed).start()
    sizes = [parse_batch_size(m, n) for m in m_list]
    res = minibatch.multiprompt_sgd(n, d, N, mu_star, sizes, steps, warm, perturb, seed)

    def diag_rows():
        for m in sizes:
            t = res.traces[m]
            for k in range(t.population_loss.size):
                yield (m, k, t.population_loss[k], t.reference_residual[k],
                       t.distance_to_reference[k])

    p = write_csv(outdir / "sgd_diagnostics.csv", "sgd-diagnostics/1",
                  ("m", "step", "population_loss", "reference_residual",
                   "distance_to_reference"), diag_rows())
    man.add_file(p)
    p = write_csv(outdir / "sgd_mu_values.csv", "sgd-mu-values/1",
                  ("prompt", "mu_i", "above_1", "above_2"),
                  ((i, v, int(v > 1.0), int(v > 2.0))
                   for i, v in enumerate(res.mu_values)))
    man.add_file(p)
    man.note(f"eta={res.eta!r} loss_floor={res.loss_floor!r}")
    man.note(f"fraction |mu_i|>1: {res.fraction_above_1:.4f}, >2: {res.fraction_above_2:.4f}")
    for m in sizes:
        t = res.traces[m]
        man.note(f"m={m}: recorded={t.population_loss.size} diverged={t.diverged} "
                 f"max_loss={float(t.population_loss.max())!r}")
    man.write(outdir)
    return 0


def cmd_identity_suite(samples, seed, outdir: Path | None) -> int:
    checks = identities.run_identity_suite(samples, seed)
    for c in checks:
        print(c.line())
    ok = all(c.passed for c in checks)
    print(f"{'ALL PASS' if ok else 'FAILURES PRESENT'} ({sum(c.passed for c in checks)}"
          f"/{len(checks)})")
    if outdir is not None:
        man = RunManifest("identity-suite", {"samples": samples}, seed).start()
        p = write_csv(outdir / "identity_report.csv", "identity-report/1",
                      ("name", "samples", "residual", "tol", "passed", "note"),
                      ((c.name, c.samples, c.residual, c.tol, int(c.passed), c.note)
                       for c in checks))
        man.add_file(p)
        man.write(outdir)
    return 0 if ok else 1
