"""Estimators used by the simulation studies."""
from __future__ import annotations

import csv
import json
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import kendalltau, rankdata

from .copulas import Copula
from .errors import DivergenceError, DomainError, DomainWarning, EstimationError, InputError

NEWTON_MAX_ITER = 50
NEWTON_TOL = 1e-8
MRE_GRID = 10
MRE_MC_DRAWS = 10_000


@dataclass
class ObservationSet:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        z = np.asarray(self.z, dtype=float)
        if z.ndim == 1:
            z = z[:, None]
        self.z = z
        if self.x.shape != self.y.shape or self.x.ndim != 1 or z.shape[0] != self.x.size:
            raise InputError("x, y and z must describe the same number of records")
        if not (np.all(self.x > 0) and np.all(self.y > 0)):
            raise InputError("lifetimes must be positive")

    def __len__(self):
        return self.x.size

    @classmethod
    def from_pairs(cls, pairs) -> "ObservationSet":
        if pairs.covariates is None:
            raise InputError("sample carries no covariates")
        return cls(pairs.first, pairs.second, pairs.covariates)

    @classmethod
    def from_csv(cls, path) -> "ObservationSet":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header = [h.strip() for h in rows[0]]
        if header[:2] != ["x", "y"] or len(header) < 3:
            raise InputError("observation CSV header must be x,y,z1,...,zd")
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
        return cls(data[:, 0], data[:, 1], data[:, 2:])


@dataclass
class FitResult:
    coefficients: np.ndarray
    converged: bool
    iterations: int
    log_partial_likelihood: float
    gradient_norm: float

    @property
    def usable(self) -> bool:
        return self.converged

    def to_dict(self) -> dict:
        d = asdict(self)
        d["coefficients"] = [float(c) for c in self.coefficients]
        d["usable"] = self.usable
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _pairs(x, y=None):
    if y is None:
        x, y = x.first, x.second
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError("paired coordinates must be 1-d arrays of equal length")
    if x.size < 2:
        raise InputError("at least two pairs are required")
    return x, y


def _tied_pairs(x) -> int:
    _, counts = np.unique(x, return_counts=True)
    return int(np.sum(counts * (counts - 1) // 2))


def kendall_tau(x, y=None) -> float:
    """(concordant - discordant) / C(n, 2); pairs tied in either coordinate count as neither.

    Accepts a :class:`SamplePairSet` or two arrays. The pair count comes from
    scipy's O(n log n) tau-b, rescaled to the C(n, 2) denominator.
    """
    x, y = _pairs(x, y)
    n0 = x.size * (x.size - 1) // 2
    n1, n2 = _tied_pairs(x), _tied_pairs(y)
    if n1 == n0 or n2 == n0:
        return 0.0
    tau_b = kendalltau(x, y, variant="b").statistic
    return float(tau_b * np.sqrt(float(n0 - n1) * float(n0 - n2)) / n0)


def theta_from_tau(family: str, tau: float) -> float:
    """Plug-in parameter from Kendall's tau.

    clayton: 2 tau / (1 - tau); gumbel: 1 / (1 - tau); amh: 2 / (3 - tau).
    """
    family = family.lower()
    tau = float(tau)
    if not -1 <= tau <= 1:
        raise DomainError("tau must lie in [-1, 1]")
    if family == "clayton":
        if tau == 1:
            raise DivergenceError("Clayton plug-in diverges at tau = 1")
        theta = 2 * tau / (1 - tau)
        ok = theta > 0
    elif family == "gumbel":
        if tau == 1:
            raise DivergenceError("Gumbel plug-in diverges at tau = 1")
        theta = 1 / (1 - tau)
        ok = theta >= 1
    elif family == "amh":
        theta = 2 / (3 - tau)
        ok = 0 <= theta < 1
    else:
        raise DomainError(f"no plug-in estimator for family {family!r}")
    if not ok:
        warnings.warn(f"{family} plug-in estimate {theta} lies outside the family domain",
                      DomainWarning, stacklevel=2)
    return theta


def spearman_rho_empirical(x, y=None) -> float:
    x, y = _pairs(x, y)
    rx, ry = rankdata(x), rankdata(y)
    if np.ptp(rx) == 0 or np.ptp(ry) == 0:
        raise InputError("Spearman's rho is undefined for a constant coordinate")
    return float(np.corrcoef(rx, ry)[0, 1])


# ---------------------------------------------------------------------------
# Cox partial likelihood
# ---------------------------------------------------------------------------

def _risk_sums(times, eta, z):
    """Breslow risk-set sums at each record's own time: S0, S1, S2."""
    order = np.argsort(-times, kind="stable")
    t_sorted = times[order]
    w = np.exp(eta[order] - eta.max())
    zs = z[order]
    s0 = np.cumsum(w)
    s1 = np.cumsum(w[:, None] * zs, axis=0)
    s2 = np.cumsum(w[:, None, None] * zs[:, :, None] * zs[:, None, :], axis=0)
    # last position holding a time >= t (ties share the full risk set)
    last = np.searchsorted(-t_sorted, -t_sorted, side="right") - 1
    inv = np.empty_like(order)
    inv[order] = np.arange(order.size)
    idx = last[inv]
    return s0[idx], s1[idx], s2[idx], eta.max()


def _cox_terms(beta, times, z):
    eta = z @ beta
    s0, s1, s2, shift = _risk_sums(times, eta, z)
    loglik = float(np.sum(eta - shift - np.log(s0)))
    mean = s1 / s0[:, None]
    grad = np.sum(z - mean, axis=0)
    info = np.sum(s2 / s0[:, None, None] - mean[:, :, None] * mean[:, None, :], axis=0)
    return loglik, grad, info


def cox_partial_loglik(beta, times, covariates) -> float:
    z = np.asarray(covariates, dtype=float).reshape(len(times), -1)
    return _cox_terms(np.atleast_1d(np.asarray(beta, dtype=float)),
                      np.asarray(times, dtype=float), z)[0]


def cox_pl_fit(times, covariates, max_iter: int = NEWTON_MAX_ITER,
               tol: float = NEWTON_TOL) -> FitResult:
    """Newton-Raphson maximiser of the Breslow partial likelihood, no censoring.

    Step halving is applied whenever a full step lowers the likelihood.
    Raises :class:`EstimationError` when the information matrix is singular.
    """
    times = np.asarray(times, dtype=float)
    z = np.asarray(covariates, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    if times.ndim != 1 or z.shape[0] != times.size:
        raise InputError("one covariate row per time is required")
    if times.size < 2 or not np.all(np.isfinite(times)) or np.any(times <= 0):
        raise InputError("times must be positive and finite, at least two records")
    beta = np.zeros(z.shape[1])
    loglik, grad, info = _cox_terms(beta, times, z)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        try:
            cond = np.linalg.cond(info)
        except np.linalg.LinAlgError:
            cond = np.inf
        if not np.isfinite(cond) or cond > 1e12:
            raise EstimationError("singular information matrix: covariates show no contrast")
        step = np.linalg.solve(info, grad)
        scale = 1.0
        for _ in range(30):
            cand = beta + scale * step
            c_loglik, c_grad, c_info = _cox_terms(cand, times, z)
            if c_loglik >= loglik - 1e-12 * abs(loglik):
                break
            scale *= 0.5
        beta, loglik, grad, info = cand, c_loglik, c_grad, c_info
        if np.linalg.norm(grad) < tol:
            return FitResult(beta, True, iterations, loglik, float(np.linalg.norm(grad)))
    return FitResult(beta, False, iterations, loglik, float(np.linalg.norm(grad)))


# ---------------------------------------------------------------------------
# copula discrepancy
# ---------------------------------------------------------------------------

def mre_grid_weights(c_true: Copula, resolution: int = MRE_GRID, uniform: bool = False):
    """Interior midpoint grid and weights proportional to the true density there.

    ``uniform=True`` gives every grid point the same weight instead.
    """
    t = (np.arange(resolution) + 0.5) / resolution
    uu, vv = np.meshgrid(t, t, indexing="ij")
    if uniform:
        return uu, vv, np.full(uu.shape, 1.0 / uu.size)
    dens = np.asarray(c_true.density(uu, vv), dtype=float)
    if np.any(dens < 0) or not np.all(np.isfinite(dens)):
        raise EstimationError("true copula density is not a valid weight on the grid")
    return uu, vv, dens / dens.sum()


def mean_relative_error(c_true: Copula, c_est: Copula, scheme: str = "grid",
                        rng=None, resolution: int = MRE_GRID, draws: int = MRE_MC_DRAWS,
                        grid=None) -> float:
    """Average of ``|C_true - C_est| / C_true`` under the true copula.

    ``grid``: a 10x10 interior midpoint grid with weights proportional to the
    true density (normalised to one). ``uniform``: the same grid with equal
    weights. ``mc``: the plain mean over draws from ``c_true``. A precomputed ``(uu, vv, weights)`` triple may be passed as
    ``grid`` to reuse the weights across estimates.
    """
    if scheme in ("grid", "uniform"):
        uu, vv, wts = (grid if grid is not None
                       else mre_grid_weights(c_true, resolution, uniform=scheme == "uniform"))
        ct = c_true.cdf(uu, vv)
        return float(np.sum(wts * np.abs((ct - c_est.cdf(uu, vv)) / ct)))
    if scheme == "mc":
        from .sampling import SeededRng, sample_copula

        rng = SeededRng(0) if rng is None else rng
        pts = sample_copula(c_true, draws, rng)
        ct = c_true.cdf(pts.first, pts.second)
        keep = ct > 0
        rel = np.abs((ct[keep] - c_est.cdf(pts.first[keep], pts.second[keep])) / ct[keep])
        return float(np.mean(rel))
    raise DomainError(f"unknown scheme {scheme!r}; expected 'grid', 'uniform' or 'mc'")
