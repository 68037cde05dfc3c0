"""Closed-form distributions and seeded random sampling.

The log-logistic law is parametrized by its median ``mu`` and the slope
``rho`` of its odds-ratio power law; the textbook shape parameter is
``sigma = 1/rho``.  All samplers draw through a :class:`RandomSource` so
that runs are bit-reproducible given a seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

# Uniform draws are clamped to the open interval (0, 1): log(0) is the
# only failure mode of inversion sampling.
_MIN_UNIFORM = 2.0**-64

_PSD_TOL = 1e-12


@dataclass(frozen=True)
class LogLogisticParams:
    """Median ``mu`` (seconds) and odds-ratio slope ``rho`` (shape = 1/rho)."""

    mu: float
    rho: float = 1.0

    def __post_init__(self):
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ParameterError(f"mu must be positive and finite, got {self.mu}")
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise ParameterError(f"rho must be positive and finite, got {self.rho}")

    @property
    def sigma(self) -> float:
        return 1.0 / self.rho


@dataclass(frozen=True)
class ExponentialParams:
    """Mean ``beta`` (seconds); the rate is 1/beta."""

    beta: float

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ParameterError(f"beta must be positive and finite, got {self.beta}")


def _check_positive(x, name: str = "x"):
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be positive and finite")
    return arr


def llg_pdf(x, p: LogLogisticParams):
    """Log-logistic density e^z / (sigma * x * (1+e^z)^2), z = rho*ln(x/mu).

    Evaluated as rho / (4*x*cosh^2(z/2)), which is stable for large |z|.
    Accepts scalars or arrays; requires x > 0.
    """
    arr = _check_positive(x)
    z = p.rho * (np.log(arr) - math.log(p.mu))
    out = p.rho / (4.0 * arr * np.cosh(0.5 * z) ** 2)
    return out if isinstance(out, np.ndarray) and np.ndim(x) else float(out)


def llg_cdf(x, p: LogLogisticParams):
    """Log-logistic CDF 1 / (1 + e^{-z})."""
    arr = _check_positive(x)
    z = p.rho * (np.log(arr) - math.log(p.mu))
    out = 0.5 * (1.0 + np.tanh(0.5 * z))  # expit(z), overflow-free
    return out if isinstance(out, np.ndarray) and np.ndim(x) else float(out)


def llg_quantile(q, p: LogLogisticParams):
    """Exact inverse of :func:`llg_cdf`: mu * (q/(1-q))^(1/rho) for q in (0, 1)."""
    qa = np.asarray(q, dtype=float)
    if np.any(qa <= 0) or np.any(qa >= 1):
        raise DomainError("quantile level must lie strictly inside (0, 1)")
    out = p.mu * (qa / (1.0 - qa)) ** (1.0 / p.rho)
    return out if np.ndim(q) else float(out)


class RandomSource:
    """Seeded uniform/normal stream (PCG64) with deterministic substreams.

    Identical seeds yield identical draw sequences.  Parallel work derives
    per-worker sources via :meth:`spawn`, which XORs the stream index into
    the base seed; callers use 1-based indices so the parent stream is
    never duplicated.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self) -> float:
        """One uniform draw from the open interval (0, 1)."""
        return float(self.uniforms(1)[0])

    def uniforms(self, n: int) -> np.ndarray:
        """n uniform draws, clamped away from 0 so that log(u) is finite."""
        return np.maximum(self._gen.random(int(n)), _MIN_UNIFORM)

    def standard_normals(self, n: int) -> np.ndarray:
        return self._gen.standard_normal(int(n))

    def spawn(self, index: int) -> "RandomSource":
        """Independently seeded child source for stream ``index`` (use >= 1).

        The index is diffused through a splitmix-style multiply before the
        XOR; XOR-ing the raw index would hand adjacent base seeds
        overlapping child streams (seed^3 == (seed^2)^1), silently
        correlating supposedly independent replicates.
        """
        mixed = (int(index) * 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
        mixed ^= mixed >> 31
        return RandomSource(self.seed ^ mixed)

    def __repr__(self):
        return f"RandomSource(seed={self.seed})"


def exp_sample(p: ExponentialParams, rng: RandomSource) -> float:
    """One exponential draw by inversion: -beta * ln(u)."""
    return -p.beta * math.log(rng.uniform())


def _psd_cholesky(cov: np.ndarray, tol: float = _PSD_TOL) -> np.ndarray:
    """Lower-triangular factor of a (possibly semidefinite) 2x2 covariance.

    Pivots within ``tol`` of zero (relative to the diagonal scale) are
    treated as exactly zero so that degenerate covariances sample as
    point masses; genuinely negative pivots raise ``ParameterError``.
    """
    a, b = float(cov[0, 0]), float(cov[0, 1])
    c = float(cov[1, 1])
    scale = max(1.0, abs(a), abs(c))
    eps = tol * scale
    if a < -eps or c < -eps:
        raise ParameterError("covariance has a negative diagonal entry")
    if a <= eps:
        if abs(b) > eps:
            raise ParameterError("covariance is not positive semi-definite")
        return np.array([[0.0, 0.0], [0.0, math.sqrt(max(c, 0.0))]])
    l11 = math.sqrt(a)
    l21 = b / l11
    rem = c - l21 * l21
    if rem < -eps:
        raise ParameterError("covariance is not positive semi-definite")
    return np.array([[l11, 0.0], [l21, math.sqrt(max(rem, 0.0))]])


@dataclass(frozen=True, eq=False)
class BivariateGaussianParams:
    """Mean vector and symmetric PSD 2x2 covariance for (rho_i, log mu_i)."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(2)
        cov = np.asarray(self.cov, dtype=float).reshape(2, 2)
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ParameterError("mean and covariance must be finite")
        scale = max(1.0, float(np.abs(cov).max()))
        if abs(cov[0, 1] - cov[1, 0]) > _PSD_TOL * scale:
            raise ParameterError("covariance must be symmetric")
        cov = 0.5 * (cov + cov.T)
        _psd_cholesky(cov)  # validates PSD up to pivot tolerance
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


def bvn_sample(p: BivariateGaussianParams, rng: RandomSource, size: int | None = None):
    """Sample (rho_i, log mu_i) pairs via the Cholesky factor of the covariance.

    Returns a (2,) vector when ``size`` is None, else a (size, 2) array.
    """
    factor = _psd_cholesky(p.cov)
    n = 1 if size is None else int(size)
    z = rng.standard_normals(2 * n).reshape(n, 2)
    out = p.mean + z @ factor.T
    return out[0] if size is None else out
