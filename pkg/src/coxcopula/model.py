"""The bivariate Cox model: covariate links and propagation of dependence.

Under covariate ``z`` the margins follow proportional hazards with factors
``Phi(z)`` and ``Psi(z)``; the copula of the joint survival function becomes

    u^((Phi-Psi)/Phi) * C0(u^(1/Phi), v^(1/Psi))^Psi        if Phi >= Psi
    v^((Psi-Phi)/Psi) * C0(u^(1/Phi), v^(1/Psi))^Phi        otherwise.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .copulas import (
    ArchimedeanCopula,
    ArchimedeanGenerator,
    AsymmetricLogisticPickands,
    ConstantPickands,
    Copula,
    ExtendedArchimedeanCopula,
    ExtremeValueCopula,
    GumbelBarnettCopula,
    PickandsFunction,
    ProductCopula,
)
from .errors import DomainError, InputError, PropagationWarning, TransitionDomainError, ValidityError
from .verify import GridSpec, check_copula_axioms, check_pickands


def as_covariate(z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.ndim != 1:
        raise InputError("a covariate must be a scalar or a 1-d vector")
    if not np.all(np.isfinite(z)):
        raise InputError("covariate values must be finite")
    return z


@dataclass(frozen=True)
class CovariateLink:
    """Log-linear hazard factors ``Phi(z) = exp(a.z)`` and ``Psi(z) = exp(b.z)``."""

    alpha_coefs: tuple
    beta_coefs: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in np.atleast_1d(self.alpha_coefs))
        b = tuple(float(x) for x in np.atleast_1d(self.beta_coefs))
        if len(a) != len(b):
            raise InputError("alpha_coefs and beta_coefs must have equal length")
        object.__setattr__(self, "alpha_coefs", a)
        object.__setattr__(self, "beta_coefs", b)

    @property
    def dim(self) -> int:
        return len(self.alpha_coefs)

    def _z(self, z):
        z = as_covariate(z)
        if z.size != self.dim:
            raise InputError(f"covariate has dimension {z.size}, link expects {self.dim}")
        return z

    def phi(self, z) -> float:
        return float(np.exp(np.dot(self.alpha_coefs, self._z(z))))

    def psi(self, z) -> float:
        return float(np.exp(np.dot(self.beta_coefs, self._z(z))))

    def factors(self, z) -> tuple[float, float]:
        return self.phi(z), self.psi(z)

    def alpha(self, z) -> float:
        """``min(Psi/Phi, 1)``, the exponent acting on the first margin's copula argument."""
        p, q = self.factors(z)
        return min(q / p, 1.0)

    def beta(self, z) -> float:
        p, q = self.factors(z)
        return min(p / q, 1.0)

    def K(self, z) -> float:
        p, q = self.factors(z)
        return q / p

    def W(self, z) -> float:
        """``min(1/K, 1)``, which is ``beta(z)``."""
        return self.beta(z)


@dataclass(frozen=True)
class SurvivalMarginal:
    """Weibull baseline ``exp(-(t/scale)^shape)`` raised to a PH power."""

    shape: float
    scale: float
    ph_power: float = 1.0

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0 and self.ph_power > 0):
            raise DomainError("Weibull shape, scale and PH power must be positive")

    def with_power(self, power: float) -> "SurvivalMarginal":
        return SurvivalMarginal(self.shape, self.scale, float(power))

    def _t(self, t):
        t = np.asarray(t, dtype=float)
        if np.isnan(t).any():
            raise InputError("time contains NaN")
        if (t < 0).any():
            raise InputError("times must be nonnegative")
        return t

    def sf(self, t):
        t = self._t(t)
        return np.exp(-self.ph_power * (t / self.scale) ** self.shape)

    def baseline_sf(self, t):
        t = self._t(t)
        return np.exp(-((t / self.scale) ** self.shape))

    def hazard(self, t):
        t = self._t(t)
        return self.ph_power * self.shape / self.scale * (t / self.scale) ** (self.shape - 1.0)

    def inverse_sf(self, p):
        p = np.asarray(p, dtype=float)
        if ((p < 0) | (p > 1)).any():
            raise DomainError("survival probabilities must lie in [0, 1]")
        with np.errstate(divide="ignore"):
            return self.scale * (-np.log(p) / self.ph_power) ** (1.0 / self.shape)


class PropagatedCopula(Copula):
    """Copula of the joint survival function under covariate factors ``(Phi, Psi)``.

    Evaluates the propagation formula literally around any baseline copula.
    """

    kind = "propagated"

    def __init__(self, baseline: Copula, phi: float, psi: float):
        if not (phi > 0 and psi > 0 and np.isfinite(phi) and np.isfinite(psi)):
            raise DomainError("hazard factors must be finite and positive")
        self.baseline = baseline
        self.phi = float(phi)
        self.psi = float(psi)

    @property
    def is_tp2(self):
        return self.baseline.is_tp2

    @property
    def params(self):
        return {"baseline": self.baseline, "phi": self.phi, "psi": self.psi}

    def _cdf(self, u, v):
        p, q = self.phi, self.psi
        inner = self.baseline.cdf(u ** (1.0 / p), v ** (1.0 / q))
        if p >= q:
            return u ** ((p - q) / p) * inner**q
        return v ** ((q - p) / q) * inner**p


@dataclass(frozen=True)
class PropagatedModel:
    baseline_copula: Copula
    link: CovariateLink

    def copula(self, z, closed_form: bool = True) -> Copula:
        return propagate_copula(self, z, closed_form=closed_form)


def _generator_of(c: Copula) -> ArchimedeanGenerator | None:
    if isinstance(c, ArchimedeanCopula):
        return c.generator
    return None


def propagate_copula(m: PropagatedModel, z, closed_form: bool = True) -> Copula:
    """Copula under covariate ``z``.

    With ``closed_form`` the result stays in the baseline's stable class when
    one applies (product, archimedean, extended archimedean, extreme-value,
    Gumbel-Barnett with ``Phi >= Psi``); otherwise the propagation formula
    is evaluated around the baseline.

    Baselines not known to be TP2 are accepted when ``min(Phi, Psi) >= 1``.
    Below that a copula-axiom scan runs on the result and any violation is
    reported through :class:`PropagationWarning`.
    """
    c0, link = m.baseline_copula, m.link
    phi, psi = link.factors(z)
    if closed_form:
        out = _closed_form(c0, link, z, phi, psi)
        if out is not None:
            return out
    out = PropagatedCopula(c0, phi, psi)
    if not c0.is_tp2 and min(phi, psi) < 1:
        report = check_copula_axioms(out, GridSpec(32, 1e-3))
        if not report.passed:
            warnings.warn(f"propagated copula is not a copula: {report.message}",
                          PropagationWarning, stacklevel=2)
    return out


def _closed_form(c0, link, z, phi, psi):
    if isinstance(c0, ProductCopula):
        return ProductCopula()
    g0 = _generator_of(c0)
    if g0 is not None:
        g = propagate_generator(g0, link, z)
        return ExtendedArchimedeanCopula(g, link.alpha(z), link.beta(z))
    if isinstance(c0, ExtendedArchimedeanCopula):
        g = propagate_generator(c0.generator, link, z)
        return ExtendedArchimedeanCopula(g, link.alpha(z) * c0.kappa, link.beta(z) * c0.eta)
    if isinstance(c0, ExtremeValueCopula):
        return ExtremeValueCopula(propagate_pickands(c0.pickands, link, z))
    if isinstance(c0, GumbelBarnettCopula) and phi >= psi and c0.theta / phi <= 1:
        return GumbelBarnettCopula(c0.theta / phi)
    return None


def propagate_generator(g0: ArchimedeanGenerator, link: CovariateLink, z) -> ArchimedeanGenerator:
    """``phi_z(t) = phi0(t^(1/min(Phi, Psi)))``; requires a TP2 baseline generator."""
    g0.check(require_tp2=True)
    phi, psi = link.factors(z)
    return g0.with_exponent(g0.exponent / min(phi, psi))


def propagate_archimedean(g0: ArchimedeanGenerator, link: CovariateLink, z, u, v):
    """``u^(1-a) v^(1-b) phi_z^-1(phi_z(u^a) + phi_z(v^b))`` with ``a, b`` the ratio exponents."""
    return propagate_extended_archimedean(g0, 1.0, 1.0, link, z, u, v)


def propagate_extended_archimedean(g0: ArchimedeanGenerator, kappa: float, eta: float,
                                   link: CovariateLink, z, u, v):
    if not (0 <= kappa <= 1 and 0 <= eta <= 1):
        raise DomainError("kappa and eta must lie in [0, 1]")
    g = propagate_generator(g0, link, z)
    c = ExtendedArchimedeanCopula(g, link.alpha(z) * kappa, link.beta(z) * eta)
    return c.cdf(u, v)


# ---------------------------------------------------------------------------
# Pickands functions
# ---------------------------------------------------------------------------

def _require_valid(a: PickandsFunction, error=ValidityError):
    report = check_pickands(a, resolution=1001)
    if not report.passed:
        raise error(f"invalid dependence function: {report.message}")


class PropagatedPickands(PickandsFunction):
    """``1 - WK - sW(1-K) + W((1-s)K + s) A(s / (K(1-s) + s))`` with ``K = Psi/Phi``."""

    kind = "propagated"

    def __init__(self, base: PickandsFunction, K: float):
        self.base = base
        self.K = float(K)
        self.W = min(1.0 / self.K, 1.0)

    @property
    def params(self):
        return {"base": self.base, "K": self.K}

    def _eval(self, s):
        K, W = self.K, self.W
        d = (1.0 - s) * K + s
        return 1.0 - W * K - s * W * (1.0 - K) + W * d * self.base(s / d)


class TransitionPickands(PickandsFunction):
    """Dependence function at ``z'`` rebuilt from the one at ``z``.

    ``ra = alpha(z')/alpha(z)`` and ``rb = beta(z')/beta(z)``.
    """

    kind = "transition"

    def __init__(self, source: PickandsFunction, ra: float, rb: float):
        self.source = source
        self.ra = float(ra)
        self.rb = float(rb)

    @property
    def params(self):
        return {"source": self.source, "ra": self.ra, "rb": self.rb}

    def _eval(self, s):
        ra, rb = self.ra, self.rb
        d = (1.0 - s) * ra + s * rb
        return 1.0 - ra + (ra - rb) * s + d * self.source(s * rb / d)


class KhoudrajiPickands(PickandsFunction):
    """Dependence function of ``C_A1(u^(1-k), v^(1-e)) * C_A2(u^k, v^e)``."""

    kind = "khoudraji"

    def __init__(self, a1: PickandsFunction, a2: PickandsFunction, kappa: float, eta: float):
        self.a1, self.a2 = a1, a2
        self.kappa, self.eta = float(kappa), float(eta)

    @property
    def params(self):
        return {"a1": self.a1, "a2": self.a2, "kappa": self.kappa, "eta": self.eta}

    def _eval(self, s):
        k, e = self.kappa, self.eta
        d1 = (1.0 - k) * (1.0 - s) + (1.0 - e) * s
        d2 = k * (1.0 - s) + e * s
        return d1 * self.a1((1.0 - e) * s / d1) + d2 * self.a2(e * s / d2)


def propagate_pickands(a: PickandsFunction, link: CovariateLink, z) -> PickandsFunction:
    """Dependence function of the propagated extreme-value copula.

    Returns ``a`` itself when ``Phi(z) == Psi(z)``.
    """
    _require_valid(a)
    K = link.K(z)
    if K == 1.0:
        return a
    if isinstance(a, ConstantPickands):
        return a
    return PropagatedPickands(a, K)


def transition_pickands(b_z: PickandsFunction, link: CovariateLink, z, z_prime) -> PickandsFunction:
    """Move a dependence function from covariate ``z`` to ``z'`` without the baseline."""
    _require_valid(b_z)
    ra = link.alpha(z_prime) / link.alpha(z)
    rb = link.beta(z_prime) / link.beta(z)
    if ra == 1.0 and rb == 1.0:
        return b_z
    out = TransitionPickands(b_z, ra, rb)
    _require_valid(out, TransitionDomainError)
    return out


def asymmetric_logistic_pickands(alpha: float, beta: float, theta: float) -> AsymmetricLogisticPickands:
    return AsymmetricLogisticPickands(alpha, beta, theta)


def khoudraji_asymmetrize(a1: PickandsFunction, a2: PickandsFunction,
                          kappa: float, eta: float) -> PickandsFunction:
    if not (0 < kappa < 1 and 0 < eta < 1):
        raise ValidityError("kappa and eta must lie in (0, 1)")
    _require_valid(a1)
    _require_valid(a2)
    return KhoudrajiPickands(a1, a2, kappa, eta)


# ---------------------------------------------------------------------------
# joint survival functions
# ---------------------------------------------------------------------------

def propagate_sdf(copula: Copula, margin_x: SurvivalMarginal, margin_y: SurvivalMarginal,
                  link: CovariateLink, z, x, y):
    """Joint survival function ``P(X > x, Y > y)`` under covariate ``z``.

    ``margin_x``/``margin_y`` give the baseline margins (their ``ph_power`` is
    ignored); ``copula`` is the baseline survival copula.
    """
    phi, psi = link.factors(z)
    fx = margin_x.baseline_sf(x)
    gy = margin_y.baseline_sf(y)
    h0 = copula.cdf(fx, gy)
    with np.errstate(divide="ignore"):
        if phi >= psi:
            out = h0**psi * fx ** (phi - psi)
        else:
            out = h0**phi * gy ** (psi - phi)
    return float(out) if np.ndim(out) == 0 else out


def marginals_at(margin_x: SurvivalMarginal, margin_y: SurvivalMarginal,
                 link: CovariateLink, z) -> tuple[SurvivalMarginal, SurvivalMarginal]:
    phi, psi = link.factors(z)
    return margin_x.with_power(phi * margin_x.ph_power), margin_y.with_power(psi * margin_y.ph_power)


def recover_factors(h0_values, fx_values, hz_values) -> tuple[float, float]:
    """Solve ``log Hz = Phi log F0 + Psi (log H0 - log F0)`` at two points.

    Recovers ``(Phi, Psi)`` on the ``Phi >= Psi`` branch from the baseline
    joint and first-margin survival values and the propagated joint values.
    """
    h0 = np.log(np.asarray(h0_values, dtype=float))
    f0 = np.log(np.asarray(fx_values, dtype=float))
    hz = np.log(np.asarray(hz_values, dtype=float))
    if h0.shape != (2,) or f0.shape != (2,) or hz.shape != (2,):
        raise InputError("exactly two evaluation points are required")
    mat = np.column_stack([f0, h0 - f0])
    sol = np.linalg.solve(mat, hz)
    return float(sol[0]), float(sol[1])
