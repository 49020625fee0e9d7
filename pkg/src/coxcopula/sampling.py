"""Random generation from the copulas in scope and from the bivariate Cox model.

Every sampler takes an explicit random source: a :class:`SeededRng` or a
``numpy.random.Generator``. There is no module-level generator.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .copulas import (
    ArchimedeanCopula,
    ArchimedeanGenerator,
    Copula,
    ExtendedArchimedeanCopula,
    FunctionCopula,
    GumbelCopula,
    ProductCopula,
)
from .errors import DomainError, InputError, NumericError
from .model import PropagatedModel, SurvivalMarginal, as_covariate, marginals_at, propagate_copula

BISECTION_TOL = 1e-12
BISECTION_MAX_ITER = 200


@dataclass(frozen=True)
class SeededRng:
    """PCG64 stream keyed by a 64-bit master seed and a stream index."""

    seed: int
    stream: int = 0
    algorithm: str = "pcg64"

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if int(self.stream) < 0:
            raise DomainError("stream index must be nonnegative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, index: int) -> "SeededRng":
        return SeededRng(self.seed, self.stream * 1_000_003 + int(index) + 1)


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, SeededRng):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise InputError("rng must be a SeededRng or numpy Generator")


@dataclass
class SamplePairSet:
    """Paired draws: uniforms ``(u, v)`` or lifetimes ``(x, y)``, optional covariates."""

    first: np.ndarray
    second: np.ndarray
    covariates: np.ndarray | None = None
    kind: str = "uniform"

    def __post_init__(self):
        self.first = np.asarray(self.first, dtype=float)
        self.second = np.asarray(self.second, dtype=float)
        if self.first.ndim != 1 or self.first.shape != self.second.shape or self.first.size < 1:
            raise InputError("pair coordinates must be 1-d arrays of equal positive length")
        if self.kind not in ("uniform", "lifetime"):
            raise InputError("kind must be 'uniform' or 'lifetime'")
        both = np.concatenate([self.first, self.second])
        if np.isnan(both).any():
            raise InputError("sample contains NaN")
        if self.kind == "uniform" and ((both < 0) | (both > 1)).any():
            raise InputError("uniform pairs must lie in [0, 1]")
        if self.kind == "lifetime" and (both < 0).any():
            raise InputError("lifetimes must be nonnegative")
        if self.covariates is not None:
            z = np.asarray(self.covariates, dtype=float)
            if z.ndim == 1:
                z = z[:, None]
            if z.shape[0] != self.first.size:
                raise InputError("one covariate row per pair is required")
            self.covariates = z

    def __len__(self):
        return self.first.size

    @property
    def columns(self) -> list[str]:
        names = ["u", "v"] if self.kind == "uniform" else ["x", "y"]
        if self.covariates is not None:
            names += [f"z{i + 1}" for i in range(self.covariates.shape[1])]
        return names

    def as_array(self) -> np.ndarray:
        cols = [self.first, self.second]
        if self.covariates is not None:
            cols += list(self.covariates.T)
        return np.column_stack(cols)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.as_array():
            writer.writerow([repr(float(x)) for x in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "SamplePairSet":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise InputError(f"{path} is empty")
        header = [h.strip() for h in rows[0]]
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
        if data.size == 0:
            raise InputError(f"{path} has no data rows")
        if header[:2] == ["u", "v"]:
            kind = "uniform"
        elif header[:2] == ["x", "y"]:
            kind = "lifetime"
        else:
            raise InputError("CSV header must start with u,v or x,y")
        z = data[:, 2:] if data.shape[1] > 2 else None
        return cls(data[:, 0], data[:, 1], z, kind)


def concat(sets: list[SamplePairSet]) -> SamplePairSet:
    kinds = {s.kind for s in sets}
    if len(kinds) != 1:
        raise InputError("cannot concatenate uniform and lifetime samples")
    zs = [s.covariates for s in sets]
    z = None if any(x is None for x in zs) else np.vstack(zs)
    return SamplePairSet(np.concatenate([s.first for s in sets]),
                         np.concatenate([s.second for s in sets]), z, kinds.pop())


# ---------------------------------------------------------------------------
# primitive samplers
# ---------------------------------------------------------------------------

def _open_uniform(gen, n):
    # (0, 1): keeps logarithms and generator evaluations finite
    u = gen.random(n)
    return np.where(u == 0.0, np.nextafter(0.0, 1.0), u)


def sample_positive_stable(index: float, rng, size=None):
    """Positive stable law with Laplace transform ``exp(-s**index)``.

    Chambers-Mallows-Stuck transform for the totally skewed case (Kanter's
    representation). ``index == 1`` is the point mass at 1.
    """
    index = float(index)
    if not 0 < index <= 1:
        raise DomainError(f"stable index must lie in (0, 1], got {index}")
    gen = as_generator(rng)
    n = 1 if size is None else size
    if index == 1.0:
        out = np.ones(n)
    else:
        w = np.pi * _open_uniform(gen, n)
        e = gen.standard_exponential(n)
        a = index
        out = (np.sin(a * w) / np.sin(w) ** (1.0 / a)
               * (np.sin((1.0 - a) * w) / e) ** ((1.0 - a) / a))
    return float(out[0]) if size is None else out


def _solve_conditional(g: ArchimedeanGenerator, u, w):
    """Find ``t`` with ``phi'(t) = phi'(u) / w`` by bisection on ``(0, u]``."""
    target = g.derivative(u) / w
    lo = np.zeros_like(u)
    hi = u.copy()
    for it in range(BISECTION_MAX_ITER):
        mid = 0.5 * (lo + hi)
        below = g.derivative(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= BISECTION_TOL * np.maximum(hi, 1e-300)):
            break
    else:
        bad = int(np.sum(hi - lo > BISECTION_TOL * np.maximum(hi, 1e-300)))
        raise NumericError(f"conditional inversion did not converge for {bad} draws "
                           f"after {BISECTION_MAX_ITER} iterations ({g!r})")
    return 0.5 * (lo + hi)


def sample_archimedean(g: ArchimedeanGenerator, n: int, rng) -> SamplePairSet:
    """Conditional-distribution method: ``V | U = u`` inverted through ``phi'``."""
    gen = as_generator(rng)
    u = _open_uniform(gen, n)
    w = _open_uniform(gen, n)
    t = _solve_conditional(g, u, w)
    with np.errstate(invalid="ignore"):
        v = g.inverse(np.maximum(g.phi(t) - g.phi(u), 0.0))
    v = np.clip(v, 0.0, 1.0)
    return SamplePairSet(u, v)


def sample_gumbel_via_frailty(theta: float, n: int, rng) -> SamplePairSet:
    """Gumbel pairs as conditionally independent draws given a stable frailty.

    ``U_i = exp(-(E_i / W)^(1/theta))`` with ``W`` positive stable of index
    ``1/theta`` and ``E_i`` standard exponential.
    """
    theta = float(theta)
    if not theta >= 1:
        raise DomainError(f"Gumbel frailty requires theta >= 1, got {theta}")
    gen = as_generator(rng)
    w = sample_positive_stable(1.0 / theta, gen, size=n)
    e = gen.standard_exponential((2, n))
    u = np.exp(-((e / w) ** (1.0 / theta)))
    return SamplePairSet(u[0], u[1])


def _sample_generic(c: Copula, n: int, gen) -> SamplePairSet:
    """Conditional method with a finite-difference partial derivative."""
    h = 1e-6
    u = _open_uniform(gen, n)
    w = _open_uniform(gen, n)
    lo_u = np.maximum(u - h, 0.0)
    hi_u = np.minimum(u + h, 1.0)

    def cond(v):
        return (c.cdf(hi_u, v) - c.cdf(lo_u, v)) / (hi_u - lo_u)

    lo = np.zeros(n)
    hi = np.ones(n)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = cond(mid) < w
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return SamplePairSet(u, 0.5 * (lo + hi))


def sample_copula(c: Copula, n: int, rng) -> SamplePairSet:
    """Draw ``n`` pairs from ``c``, dispatching to the structural sampler."""
    gen = as_generator(rng)
    n = int(n)
    if n < 1:
        raise InputError("n must be positive")
    if isinstance(c, ProductCopula):
        return SamplePairSet(gen.random(n), gen.random(n))
    if isinstance(c, ArchimedeanCopula):
        return sample_archimedean(c.generator, n, gen)
    if isinstance(c, ExtendedArchimedeanCopula):
        return sample_khoudraji(ProductCopula(), ArchimedeanCopula(c.generator),
                                c.kappa, c.eta, n, gen)
    if isinstance(c, FunctionCopula) and c.kind == "comonotone":
        u = gen.random(n)
        return SamplePairSet(u, u.copy())
    return _sample_generic(c, n, gen)


def _power_max(x1, x2, k):
    if k == 0.0:
        return x1
    if k == 1.0:
        return x2
    return np.maximum(x1 ** (1.0 / (1.0 - k)), x2 ** (1.0 / k))


def sample_khoudraji(c1: Copula, c2: Copula, kappa: float, eta: float, n: int,
                     rng) -> SamplePairSet:
    """Pairs from ``C1(u^(1-kappa), v^(1-eta)) * C2(u^kappa, v^eta)``.

    Componentwise maximum of power-transformed independent draws from the two
    components; exponents equal to 0 or 1 select a single component.
    """
    kappa, eta = float(kappa), float(eta)
    if not (0 <= kappa <= 1 and 0 <= eta <= 1):
        raise DomainError("kappa and eta must lie in [0, 1]")
    gen = as_generator(rng)
    if kappa == 1.0 and eta == 1.0:
        return sample_copula(c2, n, gen)
    if kappa == 0.0 and eta == 0.0:
        return sample_copula(c1, n, gen)
    s1 = sample_copula(c1, n, gen)
    s2 = sample_copula(c2, n, gen)
    return SamplePairSet(_power_max(s1.first, s2.first, kappa),
                         _power_max(s1.second, s2.second, eta))


def sample_model_m(m: PropagatedModel, margin_x: SurvivalMarginal, margin_y: SurvivalMarginal,
                   z, n: int, rng) -> SamplePairSet:
    """Lifetimes under covariate ``z``: copula draws mapped through the inverse survival functions."""
    z = as_covariate(z)
    gen = as_generator(rng)
    cz = propagate_copula(m, z)
    fx, gy = marginals_at(margin_x, margin_y, m.link, z)
    uv = sample_copula(cz, n, gen)
    x = fx.inverse_sf(uv.first)
    y = gy.inverse_sf(uv.second)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise NumericError("inverse survival transform produced non-finite lifetimes")
    return SamplePairSet(x, y, np.tile(z, (int(n), 1)), kind="lifetime")


def sample_direct_gumbel(theta: float, n: int, rng) -> SamplePairSet:
    return sample_archimedean(GumbelCopula(theta).generator, n, rng)
