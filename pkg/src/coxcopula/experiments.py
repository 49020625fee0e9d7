"""Simulation studies and figure-data emission.

Each experiment is driven by an :class:`ExperimentConfig` (JSON on disk) and
produces an :class:`ExperimentReport`. Replication ``r`` always draws from
stream ``r`` of the master seed, so results do not depend on worker count.
"""
from __future__ import annotations

import csv
import hashlib
import json
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .copulas import Copula, GumbelPickands, make_copula, spearman_rho
from .errors import DivergenceError, DomainWarning, EstimationError, InputError
from .estimation import (
    cox_pl_fit,
    kendall_tau,
    mean_relative_error,
    mre_grid_weights,
    theta_from_tau,
)
from .model import (
    CovariateLink,
    PropagatedModel,
    SurvivalMarginal,
    propagate_copula,
    propagate_pickands,
)
from .sampling import SeededRng, concat, sample_copula, sample_model_m
from .verify import GridSpec, check_copula_axioms

EXPERIMENTS = ("stability", "case-study", "misspec", "figures")
STABILITY_Z = [round(0.01 * i, 10) for i in range(31)]
SPOT_CHECK_EVERY = 100


@dataclass
class ExperimentConfig:
    experiment: str
    family: str = "clayton"
    theta: float = 3.0
    alpha_coefs: list = field(default_factory=lambda: [1.5])
    beta_coefs: list = field(default_factory=lambda: [2.0])
    sample_sizes: list = field(default_factory=lambda: [200])
    replications: int = 1000
    z_grid: list | None = None
    strata: list | None = None
    seed: int = 20100618
    out_dir: str = "results"
    scheme: str = "grid"
    fitted_family: str | None = None
    known_link: bool = False
    oracle_theta: bool = False
    margins: dict = field(default_factory=lambda: {"x": [2.0, 12000.0], "y": [1.5, 8000.0]})
    figure_resolution: int = 101
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InputError(f"experiment must be one of {EXPERIMENTS}")
        if int(self.replications) < 1:
            raise InputError("replication count must be >= 1")
        if any(int(n) < 2 for n in self.sample_sizes):
            raise InputError("sample sizes must be >= 2")
        if self.seed is None:
            raise InputError("a master seed is required")
        if self.scheme not in ("grid", "mc", "uniform"):
            raise InputError("scheme must be 'grid', 'mc' or 'uniform'")
        if len(self.alpha_coefs) != len(self.beta_coefs):
            raise InputError("link coefficient vectors must have equal length")
        if self.strata is not None and len(self.strata) != len(self.sample_sizes):
            raise InputError("one sample size per stratum is required")

    @classmethod
    def default(cls, experiment: str, **overrides) -> "ExperimentConfig":
        """Settings of the published studies for ``experiment``."""
        case = dict(alpha_coefs=[0.1, 0.06], beta_coefs=[0.07, 0.25],
                    strata=[[0, 0], [1, 0], [0, 1]], sample_sizes=[200, 100, 100])
        base = {
            "stability": dict(z_grid=list(STABILITY_Z)),
            "case-study": case,
            "misspec": dict(case, fitted_family="amh"),
            "figures": dict(z_grid=[0.0, 0.25, 0.5, 1.0], replications=1),
        }[experiment]
        if experiment == "misspec" and overrides.get("known_link"):
            base = dict(fitted_family="amh", z_grid=list(STABILITY_Z))
        return cls(experiment=experiment, **{**base, **overrides})

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text())
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    def canonical(self) -> str:
        d = self.to_dict()
        d.pop("workers")
        d.pop("out_dir")
        return json.dumps(d, sort_keys=True)

    @property
    def link(self) -> CovariateLink:
        return CovariateLink(self.alpha_coefs, self.beta_coefs)

    def covariates(self) -> list[np.ndarray]:
        if self.strata is not None:
            return [np.asarray(s, dtype=float) for s in self.strata]
        grid = self.z_grid if self.z_grid is not None else STABILITY_Z
        return [np.atleast_1d(float(z)) for z in grid]


@dataclass
class ExperimentReport:
    experiment: str
    labels: list
    metrics: dict
    replications: int
    excluded: int
    spot_check_failures: int
    config: dict
    provenance: str
    runtime: float = 0.0

    @property
    def exclusion_rate(self) -> float:
        return self.excluded / self.replications if self.replications else 0.0

    def to_dict(self) -> dict:
        """Deterministic record; runtime is kept out so identical configs give identical bytes."""
        return {
            "experiment": self.experiment,
            "labels": self.labels,
            "metrics": self.metrics,
            "replications": self.replications,
            "excluded": self.excluded,
            "exclusion_rate": self.exclusion_rate,
            "spot_check_failures": self.spot_check_failures,
            "config": self.config,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def mean(self, metric: str = "relative_error") -> np.ndarray:
        return np.array([row["mean"] for row in self.metrics[metric]])

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = [out / f"{self.experiment}_report.json"]
        written[0].write_text(self.to_json())
        for name, rows in self.metrics.items():
            path = out / f"{self.experiment}_{name}.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["label", "mean", "ci_normal_low", "ci_normal_high",
                            "ci_percentile_low", "ci_percentile_high", "n"])
                for label, row in zip(self.labels, rows):
                    w.writerow([label, repr(row["mean"]), *map(repr, row["ci_normal"]),
                                *map(repr, row["ci_percentile"]), row["n"]])
            written.append(path)
        timing = out / f"{self.experiment}_timing.json"
        timing.write_text(json.dumps({"runtime_seconds": self.runtime}) + "\n")
        written.append(timing)
        return written


def summarize(values) -> dict:
    """Mean with normal-approximation and percentile 95% intervals."""
    v = np.asarray(values, dtype=float)
    n = v.size
    mean = float(np.mean(v))
    half = 1.959963984540054 * float(np.std(v, ddof=1)) / np.sqrt(n) if n > 1 else 0.0
    lo, hi = (np.percentile(v, [2.5, 97.5]) if n > 1 else (mean, mean))
    return {"mean": mean, "ci_normal": [mean - half, mean + half],
            "ci_percentile": [float(lo), float(hi)], "n": int(n)}


def provenance(config: ExperimentConfig) -> str:
    digest = hashlib.sha256(config.canonical().encode()).hexdigest()[:16]
    return f"coxcopula {__version__} config:{digest}"


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------

class _Metric:
    """Discrepancy evaluator with the true-copula weights cached."""

    def __init__(self, c_true: Copula, scheme: str, seed: int):
        self.c_true = c_true
        self.scheme = scheme
        self.grid = None
        if scheme in ("grid", "uniform"):
            self.grid = mre_grid_weights(c_true, uniform=scheme == "uniform")
        self.rng = SeededRng(seed, 2**31)

    def __call__(self, c_est: Copula) -> float:
        if self.grid is not None:
            return mean_relative_error(self.c_true, c_est, self.scheme, grid=self.grid)
        return mean_relative_error(self.c_true, c_est, scheme="mc", rng=self.rng)


def _plugin_theta(family: str, tau: float) -> float | None:
    """Plug-in estimate, or ``None`` when it leaves the family domain."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", DomainWarning)
        try:
            return theta_from_tau(family, tau)
        except (DomainWarning, DivergenceError):
            return None


def _spot_check(copulas) -> int:
    return sum(0 if check_copula_axioms(c, GridSpec(16, 1e-3)).passed else 1 for c in copulas)


def _run_replications(fn, config: ExperimentConfig):
    reps = range(int(config.replications))
    if config.workers and config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(fn, [(config, r) for r in reps], chunksize=16))
    else:
        results = [fn((config, r)) for r in reps]
    return results


def _assemble(config, labels, results, metric_names, started) -> ExperimentReport:
    kept = [r for r in results if r is not None]
    excluded = len(results) - len(kept)
    if not kept:
        raise EstimationError("every replication was excluded")
    metrics = {}
    for i, name in enumerate(metric_names):
        arr = np.array([r[0][i] for r in kept])
        metrics[name] = [summarize(arr[:, j]) for j in range(arr.shape[1])]
    spot = sum(r[1] for r in kept)
    return ExperimentReport(config.experiment, labels, metrics, int(config.replications),
                            excluded, int(spot), config.to_dict(), provenance(config),
                            time.perf_counter() - started)


def _labels(config) -> list:
    if config.strata is not None:
        return ["(" + ",".join(f"{x:g}" for x in s) + ")" for s in config.strata]
    return [float(z) for z in config.z_grid]


# ---------------------------------------------------------------------------
# stability / known-link misspecification (scalar z grid)
# ---------------------------------------------------------------------------

_CACHE: dict = {}


def _truth(config):
    """True propagated copulas and cached metrics, per process."""
    key = config.canonical()
    if key not in _CACHE:
        model = PropagatedModel(make_copula(config.family, config.theta), config.link)
        trues = [propagate_copula(model, z) for z in config.covariates()]
        metrics = [_Metric(c, config.scheme, config.seed) for c in trues]
        rhos = [spearman_rho(c) for c in trues]
        _CACHE.clear()
        _CACHE[key] = (model, trues, metrics, rhos)
    return _CACHE[key]


def _stability_rep(args):
    config, rep = args
    model, trues, metrics, _ = _truth(config)
    gen = SeededRng(config.seed, rep).generator()
    fitted = config.fitted_family or config.family
    if config.oracle_theta:
        theta_hat = config.theta
    else:
        pairs = sample_copula(model.baseline_copula, int(config.sample_sizes[0]), gen)
        theta_hat = _plugin_theta(fitted, kendall_tau(pairs))
        if theta_hat is None:
            return None
    est = PropagatedModel(make_copula(fitted, theta_hat), config.link)
    ests = [propagate_copula(est, z) for z in config.covariates()]
    errors = [m(c) for m, c in zip(metrics, ests)]
    spot = _spot_check(ests) if rep % SPOT_CHECK_EVERY == 0 else 0
    return ([errors], spot)


def run_stability(config: ExperimentConfig) -> ExperimentReport:
    """Estimate theta at z=0 by the tau plug-in and track the propagated error over z."""
    if config.family not in ("clayton", "gumbel") and config.fitted_family is None:
        raise InputError("stability study supports clayton and gumbel baselines")
    if config.strata is not None:
        raise InputError("stability study takes a scalar z grid, not strata")
    if config.z_grid is None:
        config.z_grid = list(STABILITY_Z)
    started = time.perf_counter()
    results = _run_replications(_stability_rep, config)
    return _assemble(config, _labels(config), results, ["relative_error"], started)


# ---------------------------------------------------------------------------
# case study / unknown-link misspecification (stratified bivariate z)
# ---------------------------------------------------------------------------

def _case_rep(args):
    config, rep = args
    model, trues, metrics, rhos = _truth(config)
    gen = SeededRng(config.seed, rep).generator()
    mx = SurvivalMarginal(*config.margins["x"])
    my = SurvivalMarginal(*config.margins["y"])
    zs = config.covariates()
    parts = [sample_model_m(model, mx, my, z, int(n), gen)
             for z, n in zip(zs, config.sample_sizes)]
    pooled = concat(parts)
    try:
        fit_x = cox_pl_fit(pooled.first, pooled.covariates)
        fit_y = cox_pl_fit(pooled.second, pooled.covariates)
    except EstimationError:
        return None
    if not (fit_x.converged and fit_y.converged):
        return None
    fitted = config.fitted_family or config.family
    theta_hat = config.theta if config.oracle_theta else _plugin_theta(fitted, kendall_tau(parts[0]))
    if theta_hat is None:
        return None
    est = PropagatedModel(make_copula(fitted, theta_hat),
                          CovariateLink(fit_x.coefficients, fit_y.coefficients))
    ests = [propagate_copula(est, z) for z in zs]
    errors = [m(c) for m, c in zip(metrics, ests)]
    rho_err = [abs(spearman_rho(c) - r) / abs(r) for c, r in zip(ests, rhos)]
    spot = _spot_check(ests) if rep % SPOT_CHECK_EVERY == 0 else 0
    return ([errors, rho_err], spot)


def run_case_study(config: ExperimentConfig) -> ExperimentReport:
    """Stratified Weibull data, Cox-fitted links, tau plug-in at the reference stratum."""
    if config.strata is None:
        raise InputError("case study requires covariate strata")
    started = time.perf_counter()
    results = _run_replications(_case_rep, config)
    return _assemble(config, _labels(config), results,
                     ["relative_error", "spearman_relative_error"], started)


def run_misspecification(config: ExperimentConfig) -> ExperimentReport:
    """Fit a (by default AMH) family to data from the true baseline and propagate both.

    ``known_link`` runs the scalar-z curve with the true links; otherwise the
    stratified design with Cox-fitted links.
    """
    if config.fitted_family is None:
        config.fitted_family = "amh"
    if config.known_link:
        if config.z_grid is None:
            config.z_grid = list(STABILITY_Z)
        started = time.perf_counter()
        results = _run_replications(_stability_rep, config)
        return _assemble(config, _labels(config), results, ["relative_error"], started)
    return run_case_study(config)


# ---------------------------------------------------------------------------
# figure data
# ---------------------------------------------------------------------------

def density_grid(config: ExperimentConfig, z) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint grid and propagated baseline density at scalar or vector ``z``."""
    n = int(config.figure_resolution)
    t = (np.arange(n) + 0.5) / n
    uu, vv = np.meshgrid(t, t, indexing="ij")
    model = PropagatedModel(make_copula(config.family, config.theta), config.link)
    return t, propagate_copula(model, z).density(uu, vv)


def pickands_curves(config: ExperimentConfig, theta: float | None = None,
                    resolution: int = 101) -> tuple[np.ndarray, dict]:
    s = np.linspace(0.0, 1.0, resolution)
    a = GumbelPickands(config.theta if theta is None else theta)
    return s, {float(z): propagate_pickands(a, config.link, z)(s) for z in config.z_grid}


def emit_figures(config: ExperimentConfig, out_dir=None) -> list[Path]:
    """Write density grids of the propagated baseline and Gumbel dependence curves.

    Files: ``figure1_density_z<z>.csv`` (u, v, density) per z and
    ``figure2_pickands.csv`` (s, then one column per z).
    """
    out = Path(out_dir or config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for z in config.z_grid:
        t, dens = density_grid(config, z)
        path = out / f"figure1_density_z{float(z):g}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["u", "v", "density"])
            for i, u in enumerate(t):
                for j, v in enumerate(t):
                    w.writerow([repr(float(u)), repr(float(v)), repr(float(dens[i, j]))])
        written.append(path)
    s, curves = pickands_curves(config)
    path = out / "figure2_pickands.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s"] + [f"B_z={z:g}" for z in curves])
        for i, si in enumerate(s):
            w.writerow([repr(float(si))] + [repr(float(c[i])) for c in curves.values()])
    written.append(path)
    return written


def run(config: ExperimentConfig):
    if config.experiment == "stability":
        return run_stability(config)
    if config.experiment == "case-study":
        return run_case_study(config)
    if config.experiment == "misspec":
        return run_misspecification(config)
    return emit_figures(config)
