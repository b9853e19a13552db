"""Command-line interface.

One subcommand per reference experiment plus the identity-suite runner.  All
outputs are CSV tables with a JSON run manifest; the default output directory
comes from the PRODMAP_OUTDIR environment variable.  Exit codes: 0 all
assertions passed, 1 assertion failure, 2 argument error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import defaults, experiments
from .runio import default_outdir


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t]


def _sizes(text: str) -> list:
    return [t if t in ("full", "n") else int(t) for t in text.split(",") if t]


def _pairs(text: str) -> list[tuple[float, float]]:
    out = []
    for chunk in text.split(";"):
        a, b = chunk.split(",")
        out.append((float(a), float(b)))
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="prodmap",
                                 description="Two-factor product map laboratory")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=defaults.REFERENCE_SEED)
        p.add_argument("--out", type=Path, default=None,
                       help="output directory (default: $PRODMAP_OUTDIR/<command>)")

    p = sub.add_parser("verify-reduction", help="reduced map vs sector-projected full GD")
    p.add_argument("--mu", type=_floats, default=list(defaults.REDUCTION_MUS))
    p.add_argument("--steps", type=int, default=defaults.REDUCTION_STEPS)
    p.add_argument("--tol", type=float, default=defaults.REDUCTION_TOL)
    add_common(p)

    p = sub.add_parser("bifurcation", help="balanced-line bifurcation sweep")
    p.add_argument("--grid", type=int, default=defaults.BIFURCATION_GRID)
    p.add_argument("--range", type=_floats, default=list(defaults.BIFURCATION_RANGE))
    p.add_argument("--burn", type=int, default=defaults.BIFURCATION_BURN_IN)
    p.add_argument("--keep", type=int, default=defaults.BIFURCATION_KEEP)
    add_common(p)

    p = sub.add_parser("phase-portrait", help="orbits around the invariant ellipse")
    p.add_argument("--mu", type=_floats, default=list(defaults.PORTRAIT_MUS))
    p.add_argument("--steps", type=int, default=defaults.PORTRAIT_STEPS)
    p.add_argument("--interior", type=_pairs,
                   default=list(defaults.PORTRAIT_INTERIOR),
                   help="interior seeds, e.g. '0.3,-0.2;-0.3,0.2'")
    p.add_argument("--exterior", type=_pairs,
                   default=list(defaults.PORTRAIT_EXTERIOR))
    add_common(p)

    p = sub.add_parser("separatrix-crossing", help="one-step crossings by atypical batches")
    p.add_argument("--n", type=int, default=defaults.CROSSING_N)
    p.add_argument("--m-list", type=_sizes, default=list(defaults.CROSSING_M_LIST))
    p.add_argument("--traj-steps", type=int, default=defaults.CROSSING_TRAJ_STEPS)
    p.add_argument("--draws", type=int, default=defaults.CROSSING_DRAWS)
    p.add_argument("--epsilon", type=float, default=defaults.CROSSING_EPSILON)
    add_common(p)

    p = sub.add_parser("lyapunov", help="transverse exponent vs batch size")
    p.add_argument("--sizes", type=_sizes, default=list(defaults.LYAPUNOV_SIZES))
    p.add_argument("--steps", type=int, default=defaults.LYAPUNOV_STEPS)
    p.add_argument("--real", type=int, default=defaults.LYAPUNOV_REALIZATIONS)
    p.add_argument("--n", type=int, default=defaults.LYAPUNOV_N)
    add_common(p)

    p = sub.add_parser("lsa-sgd", help="unreduced multi-prompt mini-batch training")
    p.add_argument("--n", type=int, default=defaults.SGD_N)
    p.add_argument("--d", type=int, default=defaults.SGD_D)
    p.add_argument("--N", type=int, default=defaults.SGD_N_CTX)
    p.add_argument("--mu-star", type=float, default=defaults.SGD_MU_STAR)
    p.add_argument("--m-list", type=_sizes, default=list(defaults.SGD_M_LIST))
    p.add_argument("--steps", type=int, default=defaults.SGD_STEPS)
    p.add_argument("--warm", type=int, default=defaults.SGD_WARM_STEPS)
    p.add_argument("--perturb", type=float, default=defaults.SGD_PERTURB)
    add_common(p)

    p = sub.add_parser("identity-suite", help="randomized exact-identity report")
    p.add_argument("--samples", type=int, default=defaults.IDENTITY_SAMPLES)
    p.add_argument("--seed", type=int, default=defaults.REFERENCE_SEED)
    p.add_argument("--out", type=Path, default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = args.out if args.out is not None else default_outdir() / args.command
    if args.command == "verify-reduction":
        return experiments.cmd_verify_reduction(args.mu, args.steps, args.seed, out,
                                                tol=args.tol)
    if args.command == "bifurcation":
        if len(args.range) != 2 or args.range[0] >= args.range[1] or args.grid < 2:
            print("invalid sweep range/grid", file=sys.stderr)
            return 2
        return experiments.cmd_bifurcation(args.grid, tuple(args.range), args.burn,
                                           args.keep, args.seed, out)
    if args.command == "phase-portrait":
        return experiments.cmd_phase_portrait(args.mu, args.steps, args.seed, out,
                                              interior=args.interior,
                                              exterior=args.exterior)
    if args.command == "separatrix-crossing":
        return experiments.cmd_separatrix_crossing(args.n, args.m_list, args.traj_steps,
                                                   args.draws, args.seed, out,
                                                   epsilon=args.epsilon)
    if args.command == "lyapunov":
        return experiments.cmd_lyapunov(args.sizes, args.steps, args.real, args.seed,
                                        out, n=args.n)
    if args.command == "lsa-sgd":
        return experiments.cmd_lsa_sgd(args.n, args.d, args.N, args.mu_star,
                                       args.m_list, args.steps, args.warm,
                                       args.perturb, args.seed, out)
    if args.command == "identity-suite":
        return experiments.cmd_identity_suite(args.samples, args.seed, args.out)
    raise AssertionError(args.command)


if __name__ == "__main__":
    sys.exit(main())
