"""Render the six reference figures from experiment CSV output.

Usage:  python render.py <figure-id g1..g6> <input-dir> <output-path.svg>

Rendering is read-only and deterministic: fixed style, salted SVG ids, no
timestamps in the image body.  Exit codes: 0 rendered, 1 missing input or
schema mismatch, 2 usage error.
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

import matplotlib

matplotlib.use("svg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from figspec import FIGURES, SchemaError, numeric, resolve_inputs  # noqa: E402

plt.rcParams.update({
    "svg.hashsalt": "prodmap-figures",
    "figure.dpi": 110,
    "font.size": 8,
    "axes.grid": True,
    "grid.alpha": 0.25,
})

LOG_FLOOR = 1e-17   # display-only clamp for log panels; data files are never clamped


def _mu_from_tag(name: str, prefix: str) -> float:
    tag = name[len(prefix):-4]
    return float(tag.replace("p", ".").replace("m", "-"))


def _clamped(x):
    return np.maximum(np.abs(x), LOG_FLOOR)


def _ellipse_xy(mu: float):
    t = np.linspace(0, 2 * math.pi, 400)
    s = 2 * math.sqrt(2 + mu) * np.cos(t)
    w = 2 * math.sqrt(2 - mu) * np.sin(t)
    return 0.5 * (s + w), 0.5 * (s - w)


def render_g1(tables, out):
    runs = tables[r"reduction_mu*.csv"]
    fig, axes = plt.subplots(len(runs), 3, figsize=(9, 2.6 * len(runs)),
                             squeeze=False)
    for row, (path, t) in enumerate(runs):
        mu = _mu_from_tag(path.name, "reduction_mu")
        Ar, Br = numeric(t, "A_red"), numeric(t, "B_red")
        Al, Bl = numeric(t, "A_lsa"), numeric(t, "B_lsa")
        k = numeric(t, "step")
        ax = axes[row][0]
        ax.plot(Ar, Br, "-", color="tab:blue", lw=1, label="reduced")
        ax.plot(Al, Bl, "--", color="tab:red", lw=1, label="projected full GD")
        ax.set_xlabel("A"); ax.set_ylabel("B")
        ax.set_title(f"mu={mu:g} phase plane")
        ax.legend(fontsize=6)
        ax = axes[row][1]
        ax.semilogy(k, _clamped(numeric(t, "abs_err_red")), color="tab:blue", lw=1)
        ax.semilogy(k, _clamped(numeric(t, "abs_err_lsa")), "--", color="tab:red", lw=1)
        ax.set_title("|A B - mu|"); ax.set_xlabel("step")
        ax = axes[row][2]
        ax.semilogy(k, _clamped(numeric(t, "discrepancy")), color="k", lw=1)
        ax.set_title("route discrepancy"); ax.set_xlabel("step")
    fig.tight_layout()
    fig.savefig(out, metadata={"Date": None})
    plt.close(fig)
    return {"rows": len(runs), "panels": 3 * len(runs)}


def render_g2(tables, out):
    pts = tables["bifurcation_points.csv"][0][1]
    div = tables["bifurcation_divergence.csv"][0][1]
    th = tables["bifurcation_thresholds.csv"][0][1]
    mu, e = numeric(pts, "mu"), numeric(pts, "e")
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(mu, e, ",", color="k", alpha=0.6, rasterized=False)
    thresholds = numeric(th, "mu")
    for x in thresholds:
        ax.axvline(x, ls="--", lw=0.8, color="tab:red")
    grid = np.linspace(float(np.nanmin(numeric(div, "mu"))),
                       float(np.nanmax(numeric(div, "mu"))), 200)
    ax.plot(grid, -grid, ":", lw=0.9, color="tab:blue")   # lower interval bound e = -mu
    ax.axhline(2.0, ls=":", lw=0.9, color="tab:blue")      # upper interval bound e = 2
    dmu = numeric(div, "mu")[numeric(div, "diverged") == 1]
    ax.plot(dmu, np.full_like(dmu, -2.45), "|", color="tab:red", ms=6)
    ax.set_xlabel("mu"); ax.set_ylabel("recorded error e")
    ax.set_ylim(-2.6, 2.3)
    ax.set_title("asymptotic balanced error per step-size column")
    fig.tight_layout()
    fig.savefig(out, metadata={"Date": None})
    plt.close(fig)
    return {"thresholds": len(thresholds), "divergence_ticks": int(dmu.size),
            "interval_bounds": 2}


def render_g3(tables, out):
    curve_files = tables["portrait_curves_mu*.csv"]
    orbit_files = tables["portrait_orbit_mu*.csv"]
    fig, axes = plt.subplots(1, len(curve_files), figsize=(5 * len(curve_files), 4.4),
                             squeeze=False)
    overlays = 0
    for col, (path, t) in enumerate(curve_files):
        mu = _mu_from_tag(path.name, "portrait_curves_mu")
        tag = path.name[len("portrait_curves_"):-4]
        ax = axes[0][col]
        curve, branch = np.array(t["curve"]), np.array(t["branch"])
        a, b = numeric(t, "a"), numeric(t, "b")
        for br in ("positive", "negative"):
            sel = (curve == "hyperbola") & (branch == br)
            ax.plot(a[sel], b[sel], "-", color="tab:green", lw=1.2)
            overlays += 1
        sel = curve == "ellipse"
        ax.plot(a[sel], b[sel], "--", color="tab:purple", lw=1.2)
        overlays += 1
        for opath, ot in orbit_files:
            if tag not in opath.name:
                continue
            label = opath.stem[-1]
            oa, ob = numeric(ot, "a"), numeric(ot, "b")
            ax.plot(oa, ob, "-", lw=0.8, alpha=0.85)
            ax.plot(oa[0], ob[0], "o", ms=5, mec="k", mfc="white")
            ax.annotate(label, (oa[0], ob[0]), fontsize=7,
                        textcoords="offset points", xytext=(4, 4))
            for k in (1, max(1, len(oa) // 3)):
                if k < len(oa):
                    ax.annotate("", xy=(oa[k], ob[k]), xytext=(oa[k - 1], ob[k - 1]),
                                arrowprops=dict(arrowstyle="->", lw=0.7))
        lim = 2 * math.sqrt(2 + mu) + 0.8
        ax.set_xlim(-lim, lim); ax.set_ylim(-lim, lim)
        ax.set_aspect("equal")
        ax.set_title(f"mu={mu:g}")
        ax.set_xlabel("a"); ax.set_ylabel("b")
    fig.tight_layout()
    fig.savefig(out, metadata={"Date": None})
    plt.close(fig)
    return {"panels": len(curve_files), "overlays": overlays}


def render_g4(tables, out):
    trajs = tables["crossing_traj_m*.csv"]
    lands = tables["crossing_landings.csv"][0][1]
    m_col = numeric(lands, "m").astype(int)
    nu, xi = numeric(lands, "nu"), numeric(lands, "xi")
    mu = float(nu[0] - xi[0])
    ea, eb = _ellipse_xy(mu)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4.6))
    ax = axes[0]
    ax.plot(ea, eb, "--", color="tab:purple", lw=1.2, label="full-batch ellipse")
    for path, t in trajs:
        m = int(path.stem.split("_m")[-1])
        ax.plot(numeric(t, "a"), numeric(t, "b"), "-", lw=0.7, alpha=0.8,
                label=f"m={m}")
    ax.plot(math.sqrt(mu), math.sqrt(mu), "*", ms=9, color="k")
    ax.set_title("switched trajectories"); ax.set_xlabel("a"); ax.set_ylabel("b")
    ax.legend(fontsize=6)
    ax = axes[1]
    ax.plot(ea, eb, "--", color="tab:purple", lw=1.2)
    legend = []
    for m in sorted(set(m_col)):
        sel = m_col == m
        crossed = numeric(lands, "crossed")[sel] == 1
        A, B = numeric(lands, "A_plus")[sel], numeric(lands, "B_plus")[sel]
        marker = "x" if m == 1 else "."
        ax.plot(A[~crossed], B[~crossed], marker, ms=3, color="tab:blue", alpha=0.5)
        ax.plot(A[crossed], B[crossed], marker, ms=4, color="tab:red", alpha=0.8)
        legend.append(f"m={m}: exit {crossed.mean():.4f}")
    ax.set_title("one-step landings; " + ", ".join(legend))
    span = 2 * math.sqrt(2 + mu) + 1.5
    ax.set_xlim(-span, span); ax.set_ylim(-span, span)
    ax.set_xlabel("a"); ax.set_ylabel("b")
    fig.tight_layout()
    fig.savefig(out, metadata={"Date": None})
    plt.close(fig)
    return {"trajectories": len(trajs), "sizes": len(set(m_col)), "ellipse": 1}


def render_g5(tables, out):
    curves = tables["lyapunov_curves.csv"][0][1]
    summary = tables["lyapunov_summary.csv"][0][1]
    fig, axes = plt.subplots(1, 2, figsize=(10, 4.2))
    ax = axes[0]
    mcol = numeric(curves, "m").astype(int)
    for m in sorted(set(mcol)):
        sel = mcol == m
        k = numeric(curves, "step")[sel]
        ax.fill_between(k, numeric(curves, "p10")[sel], numeric(curves, "p90")[sel],
                        alpha=0.25)
        ax.plot(k, numeric(curves, "p50")[sel], lw=1, label=f"m={m}")
    ax.set_xlabel("step"); ax.set_ylabel("log |dw_k / dw_0|")
    ax.legend(fontsize=6)
    ax = axes[1]
    m = numeric(summary, "m")
    lam = numeric(summary, "lambda_hat")
    lo, hi = numeric(summary, "p10"), numeric(summary, "p90")
    ax.errorbar(m, lam, yerr=[lam - lo, hi - lam], fmt="o-", capsize=3, lw=1)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("batch size m"); ax.set_ylabel("fitted transverse slope")
    fig.tight_layout()
    fig.savefig(out, metadata={"Date": None})
    plt.close(fig)
    return {"sizes": len(set(mcol)), "summary_points": int(m.size)}


def render_g6(tables, out):
    diag = tables["sgd_diagnostics.csv"][0][1]
    mus = tables["sgd_mu_values.csv"][0][1]
    mcol = numeric(diag, "m").astype(int)
    fig, axes = plt.subplots(1, 3, figsize=(12, 4.0))
    for m in sorted(set(mcol), reverse=True):
        sel = mcol == m
        k = numeric(diag, "step")[sel]
        axes[0].semilogy(k, _clamped(numeric(diag, "population_loss")[sel]),
                         lw=1, label=f"m={m}")
        axes[1].plot(k, numeric(diag, "reference_residual")[sel], lw=0.8)
        axes[2].plot(k, numeric(diag, "distance_to_reference")[sel], lw=1)
    axes[0].set_title("population loss"); axes[0].legend(fontsize=6)
    axes[1].set_title("reference-prompt residual")
    axes[2].set_title("distance to reference matrix")
    for ax in axes:
        ax.set_xlabel("step")
    inset = axes[2].inset_axes([0.45, 0.55, 0.5, 0.4])
    vals = numeric(mus, "mu_i")
    inset.hist(vals, bins=40, color="tab:gray")
    for x in (1.0, 2.0):
        inset.axvline(x, ls="--", lw=0.8, color="tab:red")
    inset.set_title("per-prompt mu_i", fontsize=6)
    inset.tick_params(labelsize=5)
    fig.tight_layout()
    fig.savefig(out, metadata={"Date": None})
    plt.close(fig)
    return {"sizes": len(set(mcol)), "histogram_thresholds": 2}


RENDERERS = {"g1": render_g1, "g2": render_g2, "g3": render_g3,
             "g4": render_g4, "g5": render_g5, "g6": render_g6}


def render(figure_id: str, input_dir: Path, output_path: Path) -> dict:
    spec = FIGURES[figure_id]
    tables = resolve_inputs(spec, input_dir)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    summary = RENDERERS[figure_id](tables, output_path)
    summary["figure_id"] = figure_id
    return summary


def main(argv) -> int:
    if len(argv) != 3 or argv[0] not in FIGURES:
        print(f"usage: render.py <{'|'.join(FIGURES)}> <input-dir> <output.svg>",
              file=sys.stderr)
        return 2
    try:
        summary = render(argv[0], Path(argv[1]), Path(argv[2]))
    except (FileNotFoundError, SchemaError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
