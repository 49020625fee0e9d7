"""Command-line entry point: ``coxcopula <subcommand> ...``.

Exit status is 0 on success, 1 when a verification verdict fails and 2 on
invalid input or a numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .copulas import GumbelPickands, make_copula
from .errors import CoxCopulaError, EstimationError
from .estimation import ObservationSet, cox_pl_fit, kendall_tau, spearman_rho_empirical, theta_from_tau
from .model import CovariateLink, PropagatedModel, SurvivalMarginal, propagate_copula, propagate_pickands
from .sampling import SamplePairSet, SeededRng, sample_copula, sample_model_m
from .verify import GridSpec, check_pickands, run_suite


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _model_args(p):
    p.add_argument("--family", default="clayton",
                   help="product, clayton, gumbel, amh or gumbel-barnett")
    p.add_argument("--theta", type=float, default=3.0)
    p.add_argument("--alpha", type=_floats, default=[1.5],
                   help="comma-separated link coefficients of the first margin")
    p.add_argument("--beta", type=_floats, default=[2.0],
                   help="comma-separated link coefficients of the second margin")
    p.add_argument("--z", type=_floats, default=[0.0], help="comma-separated covariate vector")


def _model(args):
    return PropagatedModel(make_copula(args.family, args.theta),
                           CovariateLink(args.alpha, args.beta))


def _write_rows(header, rows, out=None):
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) for x in row])
    finally:
        if out:
            fh.close()


def cmd_propagate(args):
    if args.pickands:
        if args.family != "gumbel":
            raise CoxCopulaError("--pickands needs the gumbel baseline")
        s = np.array(args.s if args.s else np.linspace(0, 1, 11))
        b = propagate_pickands(GumbelPickands(args.theta), CovariateLink(args.alpha, args.beta),
                               args.z)(s)
        _write_rows(["s", "B"], zip(s, b), args.out)
        return 0
    c = propagate_copula(_model(args), args.z)
    u = np.array(args.u)
    v = np.array(args.v)
    if u.shape != v.shape:
        raise CoxCopulaError("--u and --v need the same number of values")
    _write_rows(["u", "v", "cdf"], zip(u, v, c.cdf(u, v)), args.out)
    return 0


def cmd_verify(args):
    grid = GridSpec(args.resolution, args.margin)
    c = propagate_copula(_model(args), args.z)
    reports = run_suite(c, grid)
    if args.family == "gumbel":
        reports.append(check_pickands(propagate_pickands(
            GumbelPickands(args.theta), CovariateLink(args.alpha, args.beta), args.z)))
    text = json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    for r in reports:
        print(r.message, file=sys.stderr)
    return 0 if all(r.passed for r in reports) else 1


def cmd_sample(args):
    rng = SeededRng(args.seed)
    if args.lifetimes:
        pairs = sample_model_m(_model(args), SurvivalMarginal(*args.margin_x),
                               SurvivalMarginal(*args.margin_y), args.z, args.n, rng)
    else:
        pairs = sample_copula(propagate_copula(_model(args), args.z), args.n, rng)
    text = pairs.to_csv(args.out)
    if not args.out:
        sys.stdout.write(text)
    return 0


def cmd_estimate(args):
    pairs = SamplePairSet.from_csv(args.input)
    record = {"n": len(pairs), "kendall_tau": kendall_tau(pairs),
              "spearman_rho": spearman_rho_empirical(pairs)}
    if args.family:
        record["family"] = args.family
        record["theta"] = theta_from_tau(args.family, record["kendall_tau"])
    if pairs.kind == "lifetime" and pairs.covariates is not None:
        obs = ObservationSet.from_pairs(pairs)
        for key, times in (("cox_x", obs.x), ("cox_y", obs.y)):
            try:
                record[key] = cox_pl_fit(times, obs.z).to_dict()
            except EstimationError as exc:
                record[key] = {"error": str(exc)}
    text = json.dumps(record, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_experiment(args):
    if args.config:
        config = ex.ExperimentConfig.from_json(args.config)
        if config.experiment != args.name:
            raise CoxCopulaError(f"config describes {config.experiment!r}, not {args.name!r}")
    else:
        config = ex.ExperimentConfig.default(args.name, known_link=args.known_link)
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out_dir = args.out
    if args.scheme is not None:
        config.scheme = args.scheme
    if args.reps is not None:
        config.replications = args.reps
    if args.workers is not None:
        config.workers = args.workers
    config.__post_init__()
    if config.experiment == "figures":
        paths = ex.emit_figures(config)
    else:
        report = ex.run(config)
        paths = report.write(config.out_dir)
        for name, rows in report.metrics.items():
            means = ", ".join(f"{100 * r['mean']:.2f}%" for r in rows)
            print(f"{name}: {means} (excluded {report.excluded}/{report.replications})",
                  file=sys.stderr)
    for p in paths:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coxcopula",
                                     description="Covariate-driven copulas for bivariate survival data.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("propagate", help="evaluate a propagated copula or dependence function")
    _model_args(p)
    p.add_argument("--u", type=_floats, default=[0.5])
    p.add_argument("--v", type=_floats, default=[0.5])
    p.add_argument("--pickands", action="store_true", help="evaluate the Gumbel dependence function")
    p.add_argument("--s", type=_floats, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("verify", help="run the dependence checks on a propagated copula")
    _model_args(p)
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--margin", type=float, default=1e-3)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sample", help="draw pairs as CSV")
    _model_args(p)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--lifetimes", action="store_true", help="map through Weibull margins")
    p.add_argument("--margin-x", type=float, nargs=2, default=[2.0, 12000.0],
                   metavar=("SHAPE", "SCALE"))
    p.add_argument("--margin-y", type=float, nargs=2, default=[1.5, 8000.0],
                   metavar=("SHAPE", "SCALE"))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("estimate", help="tau, plug-in theta and Cox fits from a CSV sample")
    p.add_argument("input")
    p.add_argument("--family", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("experiment", help="run a simulation study or emit figure data")
    p.add_argument("name", choices=ex.EXPERIMENTS)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--scheme", choices=("grid", "mc", "uniform"), default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--known-link", action="store_true",
                   help="misspec only: scalar z curve with the true links")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CoxCopulaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
