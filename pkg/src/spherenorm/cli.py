"""Command-line front end.

Subcommands: ``simulate`` draws seeded projected-normal samples,
``estimate`` recovers (direction, lambda) from a sample file, ``table1``
runs the Monte Carlo convergence study, and ``linktable`` tabulates the
variance link for plotting. Exit codes: 0 success, 1 runtime error,
2 usage error. All outputs are reproducible functions of the arguments
and seed.
"""

import argparse
import sys

import numpy as np

from . import estimator, geometry, io, link
from .projnorm import ProjNormParams, sample

DEFAULT_SEED = 42
DEFAULT_GRID = (30, 50, 100, 1000, 10000)
FULL_GRID = (30, 50, 100, 1000, 10000, 100000, 1000000)


def _parse_direction(text: str) -> np.ndarray:
    parts = [p.strip() for p in text.split(",")]
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"direction {text!r} is not numeric") from None
    if len(vals) == 2:
        try:
            return geometry.from_spherical(vals[0], vals[1])
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    if len(vals) == 3:
        try:
            return geometry.project(np.asarray(vals))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    raise argparse.ArgumentTypeError(
        f"direction must be 'theta,phi' or 'x,y,z', got {text!r}"
    )


def _parse_grid(text: str):
    try:
        grid = [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid {text!r} is not a comma list of ints") from None
    if not grid or any(g < 2 for g in grid):
        raise argparse.ArgumentTypeError("grid entries must be >= 2")
    return grid


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spherenorm",
        description="Projected-normal statistics on the unit 2-sphere",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="draw a seeded projected-normal sample")
    sim.add_argument("--dir", type=_parse_direction, default="0,0",
                     help="mean direction as 'theta,phi' or 'x,y,z' (default north pole)")
    group = sim.add_mutually_exclusive_group()
    group.add_argument("--lambda", dest="lam", type=float, default=None,
                       help="variance ratio sigma^2/|mu|^2 (>= 0)")
    group.add_argument("--sigma", type=float, default=None,
                       help="shorthand for lambda = sigma^2 with |mu| = 1")
    sim.add_argument("--n", type=int, required=True, help="number of points (>= 1)")
    sim.add_argument("--seed", type=_nonneg_int, default=DEFAULT_SEED)
    sim.add_argument("--out", required=True)
    sim.add_argument("--format", choices=("cartesian", "spherical"), default="cartesian")

    est = sub.add_parser("estimate", help="estimate direction and lambda from a sample file")
    est.add_argument("--in", dest="infile", required=True)
    est.add_argument("--out", default=None, help="write the result as JSON here")
    est.add_argument("--json", action="store_true", help="print the JSON document to stdout")
    est.add_argument("--tol", type=float, default=1e-10)
    est.add_argument("--max-iter", type=int, default=1000)

    tab = sub.add_parser("table1", help="Monte Carlo convergence study of the covariance")
    tab.add_argument("--lambda", dest="lam", type=float, default=1.0)
    tab.add_argument("--grid", type=_parse_grid, default=list(DEFAULT_GRID))
    tab.add_argument("--reps", type=int, default=100)
    tab.add_argument("--seed", type=_nonneg_int, default=DEFAULT_SEED)
    tab.add_argument("--out", default=None, help="write rows as CSV here")
    tab.add_argument("--json-out", default=None, help="write the full study document here")
    tab.add_argument("--full", action="store_true",
                     help="use the complete grid up to L=1e6 (slow)")
    tab.add_argument("--threads", type=int, default=1,
                     help="parallel repetitions (joblib n_jobs)")

    lnk = sub.add_parser("linktable", help="tabulate the variance link function")
    lnk.add_argument("--lambda-min", type=float, required=True)
    lnk.add_argument("--lambda-max", type=float, required=True)
    lnk.add_argument("--points", type=int, required=True)
    lnk.add_argument("--log-spacing", action="store_true")
    lnk.add_argument("--out", required=True)
    return parser


def _cmd_simulate(args, parser) -> int:
    if args.lam is None and args.sigma is None:
        lam = 1.0
    elif args.sigma is not None:
        lam = args.sigma**2
    else:
        lam = args.lam
    if not np.isfinite(lam) or lam < 0:
        parser.error(f"--lambda must be >= 0, got {lam!r}")
    if args.n < 1:
        parser.error(f"--n must be >= 1, got {args.n}")
    params = ProjNormParams(direction=args.dir, lam=lam)
    points = sample(params, args.n, seed=args.seed)
    d = params.direction
    provenance = {
        "generator": "spherenorm simulate",
        "seed": args.seed,
        "lambda": io._fmt(lam),
        "direction": f"{io._fmt(d[0])},{io._fmt(d[1])},{io._fmt(d[2])}",
        "n": args.n,
    }
    io.write_samples(points, args.out, fmt=args.format, provenance=provenance)
    print(f"wrote {args.n} points to {args.out}")
    return 0


def _cmd_estimate(args, parser) -> int:
    points = io.read_samples(args.infile)
    if points.shape[0] < 2:
        raise ValueError("need at least 2 points")
    result = estimator.estimate(points, tol=args.tol, max_iter=args.max_iter)
    d = result.direction_hat
    theta, phi = geometry.to_spherical(d)
    print(f"points:        {points.shape[0]}")
    print(f"direction_hat: ({d[0]:.9f}, {d[1]:.9f}, {d[2]:.9f})")
    print(f"               theta={theta:.9f} phi={phi:.9f}")
    print(f"half_trace:    {result.half_trace:.9g}")
    if result.saturated:
        print("saturated: half-trace at the attainable bound; lambda_hat = inf")
    else:
        print(f"lambda_hat:    {result.lambda_hat:.9g}")
    diag = result.mean_diag
    print(f"mean iterations: {diag.iterations} (converged={diag.converged}, "
          f"gradient={diag.final_gradient_norm:.3g})")
    if args.json:
        import json as _json

        print(_json.dumps(io.result_to_dict(result), indent=2))
    if args.out:
        io.write_result(result, args.out)
    return 0


def _cmd_table1(args, parser) -> int:
    if args.reps < 1:
        parser.error(f"--reps must be >= 1, got {args.reps}")
    if not np.isfinite(args.lam) or args.lam <= 0:
        parser.error(f"--lambda must be > 0, got {args.lam!r}")
    grid = list(FULL_GRID) if args.full else list(args.grid)
    params = ProjNormParams(direction=np.array([0.0, 0.0, 1.0]), lam=args.lam)
    study = estimator.convergence_study(
        params, grid, repetitions=args.reps, seed=args.seed, n_jobs=args.threads
    )
    reps = args.reps
    header = "L        " + "".join(f"{r.L:>12d}" for r in study.rows)
    pooled = "error    " + "".join(
        f"{r.mean_abs_error / np.sqrt(r.repetitions):>12.2e}" for r in study.rows
    )
    perrun = "per-run  " + "".join(f"{r.mean_abs_error:>12.2e}" for r in study.rows)
    stderr_row = "std err  " + "".join(f"{r.std_error:>12.2e}" for r in study.rows)
    print(f"# covariance error study: lambda={args.lam} reps={reps} seed={args.seed}")
    print(header)
    print(pooled + "   (|pooled-estimate error|, comparable to single published runs)")
    print(perrun + "   (mean per-run |trace/2 - f(lambda)|)")
    print(stderr_row)
    try:
        slope = estimator.rate_fit(study)
        print(f"fitted rate: error ~ L^{slope:.3f}")
    except ValueError:
        pass
    if args.out:
        io.write_study(study, args.out)
    if args.json_out:
        io.write_study_json(study, args.json_out)
    return 0


def _cmd_linktable(args, parser) -> int:
    if not (0 < args.lambda_min < args.lambda_max):
        parser.error("require 0 < --lambda-min < --lambda-max")
    if args.points < 1:
        parser.error(f"--points must be >= 1, got {args.points}")
    table = link.build_link_table(
        args.lambda_min, args.lambda_max, args.points, log_spacing=args.log_spacing
    )
    io.write_link_table(table, args.out)
    print(f"wrote {len(table)} rows to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "estimate": _cmd_estimate,
        "table1": _cmd_table1,
        "linktable": _cmd_linktable,
    }
    try:
        return handlers[args.command](args, parser)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
