"""Grid certificates for copula axioms, TP2, PQD, min-id and Pickands validity.

A passing report means no violation was found at the scanned resolution; it
is a necessary-condition check, not a proof over the continuum.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .copulas import Copula, PickandsFunction
from .errors import DomainError

SLACK = 1e-10
PICKANDS_ENDPOINT_TOL = 1e-12
CONVEXITY_SLACK = 1e-9
DERIVATIVE_STEP = 1e-4


@dataclass(frozen=True)
class GridSpec:
    resolution: int = 64
    margin: float = 1e-3

    def __post_init__(self):
        if int(self.resolution) != self.resolution or self.resolution < 3:
            raise DomainError("grid resolution must be an integer >= 3")
        if not 0 < self.margin < 0.5:
            raise DomainError("grid margin must lie in (0, 0.5)")

    def interior(self) -> np.ndarray:
        return np.linspace(self.margin, 1.0 - self.margin, int(self.resolution))

    def closed(self) -> np.ndarray:
        return np.concatenate(([0.0], self.interior(), [1.0]))


@dataclass
class VerificationReport:
    property: str
    passed: bool
    worst_violation: float
    witness: tuple | None = None
    resolution: int | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.passed and self.witness is None:
            raise ValueError("a failing report must carry a witness")

    @property
    def message(self) -> str:
        if self.passed:
            return f"{self.property}: no violation found at resolution {self.resolution}"
        return (f"{self.property}: violation {self.worst_violation:.3e} "
                f"at {self.witness} (resolution {self.resolution})")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = "pass" if self.passed else "fail"
        d["witness"] = None if self.witness is None else [float(x) for x in self.witness]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _report(name, violations, coords, resolution, details=None, tol=SLACK):
    """Build a report from an array of signed slacks (negative = violation)."""
    violations = np.asarray(violations, dtype=float)
    bad = ~np.isfinite(violations)
    violations = np.where(bad, -np.inf, violations)
    idx = int(np.argmin(violations))
    worst = float(violations.flat[idx])
    passed = worst >= -tol
    witness = None if passed else tuple(float(c.flat[idx]) for c in coords)
    return VerificationReport(name, bool(passed), max(0.0, -worst), witness,
                              resolution, details or {})


def _merge(name, reports, resolution):
    failing = [r for r in reports if not r.passed]
    worst = max((r.worst_violation for r in reports), default=0.0)
    details = {r.property: r.worst_violation for r in reports}
    if failing:
        first = max(failing, key=lambda r: r.worst_violation)
        return VerificationReport(name, False, worst, first.witness, resolution,
                                  {**details, "failed": first.property})
    return VerificationReport(name, True, worst, None, resolution, details)


def _second_differences(values, t):
    """Volumes of adjacent grid rectangles and their lower-left corners."""
    vol = values[1:, 1:] - values[1:, :-1] - values[:-1, 1:] + values[:-1, :-1]
    uu, vv = np.meshgrid(t[:-1], t[:-1], indexing="ij")
    return vol, uu, vv


def check_copula_axioms(c: Copula, grid: GridSpec = GridSpec()) -> VerificationReport:
    """Uniform margins, groundedness and the rectangle inequality on ``grid``."""
    t = grid.closed()
    zeros, ones = np.zeros_like(t), np.ones_like(t)
    parts = [
        _report("margin-u", -np.abs(c.cdf(t, ones) - t), (t, ones), grid.resolution),
        _report("margin-v", -np.abs(c.cdf(ones, t) - t), (ones, t), grid.resolution),
        _report("grounded-u", -np.abs(c.cdf(zeros, t)), (zeros, t), grid.resolution),
        _report("grounded-v", -np.abs(c.cdf(t, zeros)), (t, zeros), grid.resolution),
    ]
    uu, vv = np.meshgrid(t, t, indexing="ij")
    vol, cu, cv = _second_differences(c.cdf(uu, vv), t)
    parts.append(_report("rectangle", vol, (cu, cv), grid.resolution))
    return _merge("copula-axioms", parts, grid.resolution)


def check_tp2(c: Copula, grid: GridSpec = GridSpec(),
              derivative: bool = False) -> VerificationReport:
    """All adjacent 2x2 determinants ``C11 C22 - C12 C21`` on the interior grid.

    For positive functions adjacent cells suffice. With ``derivative=True`` the
    differential criterion ``C C_uv - C_u C_v >= 0`` is also evaluated by
    central differences and reported in ``details``.
    """
    t = grid.interior()
    uu, vv = np.meshgrid(t, t, indexing="ij")
    vals = c.cdf(uu, vv)
    det = vals[:-1, :-1] * vals[1:, 1:] - vals[:-1, 1:] * vals[1:, :-1]
    report = _report("tp2", det, (uu[:-1, :-1], vv[:-1, :-1]), grid.resolution)
    neg = np.min(vals)
    if neg < -SLACK and report.passed:
        i = np.unravel_index(np.argmin(vals), vals.shape)
        report = VerificationReport("tp2", False, float(-neg),
                                    (float(uu[i]), float(vv[i])), grid.resolution)
    if derivative:
        h = min(DERIVATIVE_STEP, grid.margin / 2)
        cu = (c.cdf(uu + h, vv) - c.cdf(uu - h, vv)) / (2 * h)
        cv = (c.cdf(uu, vv + h) - c.cdf(uu, vv - h)) / (2 * h)
        cuv = (c.cdf(uu + h, vv + h) - c.cdf(uu + h, vv - h)
               - c.cdf(uu - h, vv + h) + c.cdf(uu - h, vv - h)) / (4 * h * h)
        crit = vals * cuv - cu * cv
        i = np.unravel_index(np.argmin(crit), crit.shape)
        report.details["derivative_min"] = float(crit[i])
        report.details["derivative_witness"] = [float(uu[i]), float(vv[i])]
    return report


def check_pqd(c: Copula, grid: GridSpec = GridSpec()) -> VerificationReport:
    """``C(u, v) >= uv`` at every interior grid point."""
    t = grid.interior()
    uu, vv = np.meshgrid(t, t, indexing="ij")
    return _report("pqd", c.cdf(uu, vv) - uu * vv, (uu, vv), grid.resolution)


def check_pickands(a: PickandsFunction, resolution: int = 1001) -> VerificationReport:
    """Endpoints, Frechet bounds and convexity by second divided differences."""
    if int(resolution) != resolution or resolution < 3:
        raise DomainError("resolution must be an integer >= 3")
    t = np.linspace(0.0, 1.0, int(resolution))
    vals = a(t)
    h = t[1] - t[0]
    ends = np.array([0.0, 1.0])
    parts = [
        _report("endpoints", -np.abs(a(ends) - 1.0), (ends,), resolution,
                tol=PICKANDS_ENDPOINT_TOL),
        _report("upper-bound", 1.0 - vals, (t,), resolution),
        _report("lower-bound", vals - np.maximum(t, 1.0 - t), (t,), resolution),
        _report("convexity", (vals[2:] - 2.0 * vals[1:-1] + vals[:-2]) / h**2,
                (t[1:-1],), resolution, tol=CONVEXITY_SLACK),
    ]
    return _merge("pickands", parts, resolution)


def check_min_id(c: Copula, gammas: Sequence[float],
                 grid: GridSpec = GridSpec()) -> VerificationReport:
    """Rectangle inequality of ``C**gamma`` for every ``gamma``."""
    gammas = [float(g) for g in gammas]
    if not gammas:
        raise DomainError("gammas must be nonempty")
    if any(g <= 0 for g in gammas):
        raise DomainError("gammas must be positive")
    t = grid.closed()
    uu, vv = np.meshgrid(t, t, indexing="ij")
    vals = c.cdf(uu, vv)
    parts = []
    for g in gammas:
        with np.errstate(invalid="ignore"):
            powered = vals**g
        vol, cu, cv = _second_differences(powered, t)
        r = _report(f"gamma={g:g}", vol, (cu, cv), grid.resolution)
        if not r.passed:
            r.witness = r.witness + (g,)
        parts.append(r)
    return _merge("min-id", parts, grid.resolution)


def run_suite(c: Copula, grid: GridSpec = GridSpec(),
              gammas: Sequence[float] = (0.1, 0.5, 2.0)) -> list[VerificationReport]:
    return [check_copula_axioms(c, grid), check_tp2(c, grid), check_pqd(c, grid),
            check_min_id(c, gammas, grid)]
