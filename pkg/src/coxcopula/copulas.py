"""Bivariate copulas, archimedean generators and Pickands dependence functions.

All evaluators are vectorised over numpy arrays and broadcast ``u`` against
``v``. Scalars in give scalars out.

The extreme-value representation used throughout is

    C(u, v) = exp[log(uv) * A(log v / log(uv))]

so the argument of a dependence function is the share carried by ``v``.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import DomainError, InputError, ValidityError

__all__ = [
    "ArchimedeanGenerator",
    "Copula",
    "ProductCopula",
    "ClaytonCopula",
    "GumbelCopula",
    "AMHCopula",
    "GumbelBarnettCopula",
    "ArchimedeanCopula",
    "ExtremeValueCopula",
    "ExtendedArchimedeanCopula",
    "FunctionCopula",
    "PickandsFunction",
    "GumbelPickands",
    "AsymmetricLogisticPickands",
    "ConstantPickands",
    "TabulatedPickands",
    "FunctionPickands",
    "comonotone",
    "countermonotone",
    "make_copula",
    "make_generator",
    "copula_cdf",
    "archimedean_cdf",
    "evc_from_pickands",
    "copula_density",
    "spearman_rho",
]

FD_STEP = 1e-5
SPEARMAN_RESOLUTION = 512


def _unit(x, name="argument"):
    x = np.asarray(x, dtype=float)
    if np.isnan(x).any():
        raise InputError(f"{name} contains NaN")
    if (x < 0).any() or (x > 1).any():
        raise DomainError(f"{name} must lie in [0, 1]")
    return x


def _out(values, scalar):
    if scalar:
        return float(values)
    return values


# ---------------------------------------------------------------------------
# archimedean generators
# ---------------------------------------------------------------------------

_GENERATOR_DOMAINS = {
    "clayton": (lambda th: th > 0, "theta > 0"),
    "gumbel": (lambda th: th >= 1, "theta >= 1"),
    "amh": (lambda th: 0 <= th < 1, "0 <= theta < 1"),
}


class ArchimedeanGenerator:
    """Strict generator ``phi(t) = phi0(t**exponent)`` of a base family.

    ``phi0`` is one of

    * clayton: ``t**-theta - 1``
    * gumbel:  ``(-log t)**theta``
    * amh:     ``log((1 - theta*(1 - t)) / t)``

    The exponent houses generators produced by covariate propagation.
    """

    __slots__ = ("family", "theta", "exponent")

    def __init__(self, family: str, theta: float, exponent: float = 1.0):
        family = family.lower()
        if family not in _GENERATOR_DOMAINS:
            raise DomainError(f"unknown generator family {family!r}")
        theta = float(theta)
        exponent = float(exponent)
        ok, msg = _GENERATOR_DOMAINS[family]
        if not math.isfinite(theta) or not ok(theta):
            raise DomainError(f"{family} generator requires {msg}, got {theta}")
        if not (exponent > 0 and math.isfinite(exponent)):
            raise DomainError(f"generator exponent must be positive, got {exponent}")
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("ArchimedeanGenerator is immutable")

    def __repr__(self):
        return (f"ArchimedeanGenerator(family={self.family!r}, theta={self.theta!r}, "
                f"exponent={self.exponent!r})")

    def __eq__(self, other):
        return (isinstance(other, ArchimedeanGenerator)
                and (self.family, self.theta, self.exponent)
                == (other.family, other.theta, other.exponent))

    def __hash__(self):
        return hash((self.family, self.theta, self.exponent))

    def with_exponent(self, exponent: float) -> "ArchimedeanGenerator":
        return ArchimedeanGenerator(self.family, self.theta, exponent)

    # base family ------------------------------------------------------------
    def _phi0(self, t):
        th = self.theta
        with np.errstate(divide="ignore", over="ignore"):
            if self.family == "clayton":
                return np.expm1(-th * np.log(t))
            if self.family == "gumbel":
                return (-np.log(t)) ** th
            return np.log1p(-th * (1.0 - t)) - np.log(t)

    def _phi0_inv(self, s):
        th = self.theta
        with np.errstate(divide="ignore", over="ignore"):
            if self.family == "clayton":
                return np.exp(-np.log1p(s) / th)
            if self.family == "gumbel":
                return np.exp(-(s ** (1.0 / th)))
            return (1.0 - th) / (np.exp(s) - th)

    def _dphi0(self, t):
        th = self.theta
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if self.family == "clayton":
                return -th * t ** (-th - 1.0)
            if self.family == "gumbel":
                return -th * (-np.log(t)) ** (th - 1.0) / t
            return th / (1.0 - th + th * t) - 1.0 / t

    def _d2phi0(self, t):
        th = self.theta
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if self.family == "clayton":
                return th * (th + 1.0) * t ** (-th - 2.0)
            if self.family == "gumbel":
                lg = -np.log(t)
                return th * ((th - 1.0) * lg ** (th - 2.0) + lg ** (th - 1.0)) / t**2
            return 1.0 / t**2 - th**2 / (1.0 - th + th * t) ** 2

    # derived generator ------------------------------------------------------
    def phi(self, t):
        t = np.asarray(t, dtype=float)
        return self._phi0(t ** self.exponent)

    def inverse(self, s):
        s = np.asarray(s, dtype=float)
        if (s < 0).any():
            raise DomainError("generator inverse is defined on [0, inf]")
        return self._phi0_inv(s) ** (1.0 / self.exponent)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        m = self.exponent
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return m * t ** (m - 1.0) * self._dphi0(t**m)

    def second_derivative(self, t):
        t = np.asarray(t, dtype=float)
        m = self.exponent
        tm = t**m
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return (m * (m - 1.0) * t ** (m - 2.0) * self._dphi0(tm)
                    + (m * t ** (m - 1.0)) ** 2 * self._d2phi0(tm))

    def tp2_margin(self, t):
        """``phi'(t) + t phi''(t)``; nonnegative iff the induced copula is TP2."""
        t = np.asarray(t, dtype=float)
        return self.derivative(t) + t * self.second_derivative(t)

    def check(self, resolution: int = 257, require_tp2: bool = False,
              tol: float = 1e-9) -> None:
        """Raise :class:`ValidityError` if a grid scan finds a generator defect."""
        t = np.linspace(0.0, 1.0, resolution + 2)[1:-1]
        values = self.phi(t)
        if abs(float(self.phi(1.0))) > 1e-12:
            raise ValidityError("generator must vanish at 1")
        if not np.all(np.diff(values) < 0):
            raise ValidityError("generator must be strictly decreasing")
        d2 = self.second_derivative(t)
        scale = np.maximum(1.0, np.abs(d2))
        if np.any(d2 < -tol * scale):
            raise ValidityError("generator must be convex")
        if require_tp2:
            margin = self.tp2_margin(t)
            scale = np.maximum(1.0, np.abs(self.derivative(t)))
            if np.any(margin < -tol * scale):
                raise ValidityError("generator violates phi' + t phi'' >= 0 (copula not TP2)")


def make_generator(family: str, theta: float) -> ArchimedeanGenerator:
    return ArchimedeanGenerator(family, theta)


# ---------------------------------------------------------------------------
# copulas
# ---------------------------------------------------------------------------

class Copula:
    """Base class: an immutable bivariate copula.

    Subclasses implement ``_cdf`` on the open unit square. The public
    :meth:`cdf` supplies the boundary values by continuity
    (``C(u, 0) = C(0, v) = 0``, ``C(u, 1) = u``, ``C(1, v) = v``).
    """

    kind = "copula"
    #: known to be totally positive of order 2 for every admissible parameter
    is_tp2 = False
    _boundary_rules = True

    @property
    def params(self) -> dict:
        return {}

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"

    def __call__(self, u, v):
        return self.cdf(u, v)

    def cdf(self, u, v):
        scalar = np.ndim(u) == 0 and np.ndim(v) == 0
        u = _unit(u, "u")
        v = _unit(v, "v")
        u, v = np.broadcast_arrays(u, v)
        if not self._boundary_rules:
            return _out(np.asarray(self._cdf(u, v), dtype=float), scalar)
        out = np.empty(u.shape, dtype=float)
        inner = (u > 0) & (u < 1) & (v > 0) & (v < 1)
        out[~inner] = np.where(u[~inner] < v[~inner], u[~inner], v[~inner])
        if inner.any():
            out[inner] = self._cdf(u[inner], v[inner])
        return _out(out, scalar)

    def _cdf(self, u, v):
        raise NotImplementedError

    def density(self, u, v):
        scalar = np.ndim(u) == 0 and np.ndim(v) == 0
        u = _unit(u, "u")
        v = _unit(v, "v")
        u, v = np.broadcast_arrays(u, v)
        if ((u <= 0) | (u >= 1) | (v <= 0) | (v >= 1)).any():
            raise DomainError("copula density is evaluated on the open unit square only")
        return _out(np.asarray(self._density(u, v), dtype=float), scalar)

    def _density(self, u, v):
        return _fd_density(self, u, v)


def _fd_density(c: Copula, u, v, h: float = FD_STEP):
    h = np.minimum(h, 0.5 * np.minimum(np.minimum(u, 1 - u), np.minimum(v, 1 - v)))
    num = (c._cdf(u + h, v + h) - c._cdf(u + h, v - h)
           - c._cdf(u - h, v + h) + c._cdf(u - h, v - h))
    return num / (4.0 * h * h)


class ProductCopula(Copula):
    kind = "product"
    is_tp2 = True

    def _cdf(self, u, v):
        return u * v

    def _density(self, u, v):
        return np.ones_like(u)


class ArchimedeanCopula(Copula):
    """``phi^{-1}(phi(u) + phi(v))`` for a strict generator."""

    kind = "archimedean"

    def __init__(self, generator: ArchimedeanGenerator):
        self.generator = generator

    @property
    def is_tp2(self):
        return self.generator.family in _GENERATOR_DOMAINS

    @property
    def params(self):
        return {"generator": self.generator}

    def _cdf(self, u, v):
        g = self.generator
        return g.inverse(g.phi(u) + g.phi(v))

    def _density(self, u, v):
        g = self.generator
        c = self._cdf(u, v)
        d1c = g.derivative(c)
        return -g.second_derivative(c) * g.derivative(u) * g.derivative(v) / d1c**3


class ClaytonCopula(ArchimedeanCopula):
    kind = "clayton"

    def __init__(self, theta: float):
        super().__init__(ArchimedeanGenerator("clayton", theta))
        self.theta = float(theta)

    @property
    def params(self):
        return {"theta": self.theta}

    def _cdf(self, u, v):
        th = self.theta
        s = np.expm1(-th * np.log(u)) + np.expm1(-th * np.log(v))
        return np.exp(-np.log1p(s) / th)

    def _density(self, u, v):
        th = self.theta
        s = np.expm1(-th * np.log(u)) + np.expm1(-th * np.log(v))
        return ((1.0 + th) * np.exp((-th - 1.0) * np.log(u * v)
                                    + (-1.0 / th - 2.0) * np.log1p(s)))


class GumbelCopula(ArchimedeanCopula):
    kind = "gumbel"

    def __init__(self, theta: float):
        super().__init__(ArchimedeanGenerator("gumbel", theta))
        self.theta = float(theta)

    @property
    def params(self):
        return {"theta": self.theta}

    @property
    def pickands(self) -> "GumbelPickands":
        return GumbelPickands(self.theta)

    def _cdf(self, u, v):
        th = self.theta
        return np.exp(-(((-np.log(u)) ** th + (-np.log(v)) ** th) ** (1.0 / th)))


class AMHCopula(ArchimedeanCopula):
    """Ali-Mikhail-Haq copula ``uv / (1 - theta (1-u)(1-v))``, 0 <= theta < 1."""

    kind = "amh"

    def __init__(self, theta: float):
        super().__init__(ArchimedeanGenerator("amh", theta))
        self.theta = float(theta)

    @property
    def params(self):
        return {"theta": self.theta}

    def _cdf(self, u, v):
        return u * v / (1.0 - self.theta * (1.0 - u) * (1.0 - v))

    def _density(self, u, v):
        th = self.theta
        d = 1.0 - th * (1.0 - u) * (1.0 - v)
        return (1.0 + th * ((1.0 + u) * (1.0 + v) - 3.0) + th**2 * (1.0 - u) * (1.0 - v)) / d**3


class GumbelBarnettCopula(Copula):
    """``uv exp(-theta log u log v)`` for theta in (0, 1]; not TP2."""

    kind = "gumbel-barnett"

    def __init__(self, theta: float):
        theta = float(theta)
        if not 0 < theta <= 1:
            raise DomainError(f"Gumbel-Barnett requires 0 < theta <= 1, got {theta}")
        self.theta = theta

    @property
    def params(self):
        return {"theta": self.theta}

    def _cdf(self, u, v):
        lu, lv = np.log(u), np.log(v)
        return np.exp(lu + lv - self.theta * lu * lv)


class ExtremeValueCopula(Copula):
    """Extreme-value copula of a Pickands dependence function."""

    kind = "evc-from-pickands"
    is_tp2 = True

    def __init__(self, pickands: "PickandsFunction"):
        self.pickands = pickands

    @property
    def params(self):
        return {"pickands": self.pickands}

    def _cdf(self, u, v):
        luv = np.log(u) + np.log(v)
        return np.exp(luv * self.pickands(np.log(v) / luv))


class ExtendedArchimedeanCopula(Copula):
    """``Pi(u^(1-kappa), v^(1-eta)) * C_phi(u^kappa, v^eta)``."""

    kind = "extended-archimedean"

    def __init__(self, generator: ArchimedeanGenerator, kappa: float, eta: float):
        kappa, eta = float(kappa), float(eta)
        if not (0 <= kappa <= 1 and 0 <= eta <= 1):
            raise DomainError("extended archimedean exponents must lie in [0, 1]")
        self.generator = generator
        self.kappa = kappa
        self.eta = eta
        self._inner = ArchimedeanCopula(generator)

    @property
    def is_tp2(self):
        return self._inner.is_tp2

    @property
    def params(self):
        return {"generator": self.generator, "kappa": self.kappa, "eta": self.eta}

    def _cdf(self, u, v):
        k, e = self.kappa, self.eta
        return u ** (1.0 - k) * v ** (1.0 - e) * self._inner.cdf(u**k, v**e)


class FunctionCopula(Copula):
    """Wrap an arbitrary function; no boundary rules are imposed.

    Used for the Frechet bounds and for deliberately invalid candidates fed to
    the verifiers.
    """

    _boundary_rules = False

    def __init__(self, fn: Callable, kind: str = "function", tp2: bool = False):
        self._fn = fn
        self.kind = kind
        self.is_tp2 = tp2

    def _cdf(self, u, v):
        return self._fn(u, v)

    def _density(self, u, v):
        return _fd_density(self, u, v)


def comonotone() -> FunctionCopula:
    """Upper Frechet bound ``min(u, v)``."""
    return FunctionCopula(np.minimum, kind="comonotone", tp2=True)


def countermonotone() -> FunctionCopula:
    """Lower Frechet bound ``max(u + v - 1, 0)``."""
    return FunctionCopula(lambda u, v: np.maximum(u + v - 1.0, 0.0), kind="countermonotone")


_FAMILIES = {
    "product": lambda theta: ProductCopula(),
    "independence": lambda theta: ProductCopula(),
    "clayton": ClaytonCopula,
    "gumbel": GumbelCopula,
    "amh": AMHCopula,
    "gumbel-barnett": GumbelBarnettCopula,
}


def make_copula(family: str, theta: float | None = None) -> Copula:
    """Build a closed-form family by name, validating the parameter domain."""
    try:
        factory = _FAMILIES[family.lower()]
    except KeyError:
        raise DomainError(f"unknown copula family {family!r}") from None
    if family.lower() not in ("product", "independence") and theta is None:
        raise DomainError(f"{family} requires a parameter")
    return factory(theta)


# ---------------------------------------------------------------------------
# Pickands dependence functions
# ---------------------------------------------------------------------------

class PickandsFunction:
    """Dependence function ``A`` on [0, 1]; call it on arrays."""

    kind = "pickands"

    @property
    def params(self) -> dict:
        return {}

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        t = np.asarray(t, dtype=float)
        if np.isnan(t).any():
            raise InputError("Pickands argument contains NaN")
        if (t < 0).any() or (t > 1).any():
            raise DomainError("Pickands functions are defined on [0, 1]")
        return _out(np.asarray(self._eval(t), dtype=float), scalar)

    def _eval(self, t):
        raise NotImplementedError

    def tabulate(self, resolution: int = 1001):
        t = np.linspace(0.0, 1.0, resolution)
        return t, self(t)


class GumbelPickands(PickandsFunction):
    """Logistic dependence function ``(t^theta + (1-t)^theta)^(1/theta)``."""

    kind = "gumbel-logistic"

    def __init__(self, theta: float):
        theta = float(theta)
        if not theta >= 1:
            raise DomainError(f"logistic dependence requires theta >= 1, got {theta}")
        self.theta = theta

    @property
    def params(self):
        return {"theta": self.theta}

    def _eval(self, t):
        th = self.theta
        return (t**th + (1.0 - t) ** th) ** (1.0 / th)


class AsymmetricLogisticPickands(PickandsFunction):
    kind = "asymmetric-logistic"

    def __init__(self, alpha: float, beta: float, theta: float):
        alpha, beta, theta = float(alpha), float(beta), float(theta)
        if not theta >= 1:
            raise DomainError(f"asymmetric logistic requires theta >= 1, got {theta}")
        if not (0 < alpha <= 1 and 0 < beta <= 1):
            raise DomainError("asymmetric logistic weights must lie in (0, 1]")
        self.alpha, self.beta, self.theta = alpha, beta, theta

    @property
    def params(self):
        return {"alpha": self.alpha, "beta": self.beta, "theta": self.theta}

    def _eval(self, s):
        a, b, th = self.alpha, self.beta, self.theta
        return (1.0 - a + (a - b) * s
                + ((a * (1.0 - s)) ** th + (b * s) ** th) ** (1.0 / th))


class ConstantPickands(PickandsFunction):
    """Constant function; only the value 1 (independence) is a valid dependence function."""

    def __init__(self, value: float = 1.0):
        self.value = float(value)
        self.kind = "constant-one" if self.value == 1.0 else "constant"

    @property
    def params(self):
        return {"value": self.value}

    def _eval(self, t):
        return np.full_like(t, self.value)


class TabulatedPickands(PickandsFunction):
    """Piecewise-linear interpolation of sampled values."""

    kind = "tabulated"

    def __init__(self, grid, values):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise InputError("grid and values must be 1-d arrays of equal length >= 2")
        if grid[0] != 0.0 or grid[-1] != 1.0 or np.any(np.diff(grid) <= 0):
            raise InputError("grid must increase strictly from 0 to 1")
        self.grid, self.values = grid, values

    @property
    def params(self):
        return {"points": int(self.grid.size)}

    def _eval(self, t):
        return np.interp(t, self.grid, self.values)


class FunctionPickands(PickandsFunction):
    """Wrap a vectorised callable."""

    def __init__(self, fn: Callable, kind: str = "function"):
        self._fn = fn
        self.kind = kind

    def _eval(self, t):
        return self._fn(t)


# ---------------------------------------------------------------------------
# functional API
# ---------------------------------------------------------------------------

def copula_cdf(c: Copula, u, v):
    return c.cdf(u, v)


def archimedean_cdf(g: ArchimedeanGenerator, u, v):
    return ArchimedeanCopula(g).cdf(u, v)


def evc_from_pickands(a: PickandsFunction, u, v):
    """Extreme-value copula of ``a``. Raises :class:`ValidityError` for invalid ``a``."""
    from .verify import check_pickands

    report = check_pickands(a, resolution=257)
    if not report.passed:
        raise ValidityError(f"invalid Pickands function: {report.message}")
    return ExtremeValueCopula(a).cdf(u, v)


def copula_density(c: Copula, u, v):
    return c.density(u, v)


def spearman_rho(c: Copula, resolution: int = SPEARMAN_RESOLUTION) -> float:
    """Spearman's rho ``12 * int C - 3`` by the midpoint rule on a square grid."""
    t = (np.arange(resolution) + 0.5) / resolution
    uu, vv = np.meshgrid(t, t, indexing="ij")
    integral = float(np.mean(c.cdf(uu, vv)))
    return float(np.clip(12.0 * integral - 3.0, -1.0, 1.0))
