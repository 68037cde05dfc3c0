"""Temporal-dependence tests for inter-event series.

A memoryless process produces gaps whose sample autocorrelation sits
inside the 95% white-noise band +-1.96/sqrt(n); real communication series
do not.  The H1 test is one-sided on the lag-1 coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import DegenerateDataError, InsufficientDataError, ParameterError
from .generators import InterEventSeries

if TYPE_CHECKING:  # pragma: no cover
    from .fitting import FitResult


@dataclass(eq=False)
class AcfResult:
    coefficients: np.ndarray  # AC_1 .. AC_max_lag
    band: float  # 95% white-noise half-width, 1.96/sqrt(n)
    n: int

    @property
    def ac1(self) -> float:
        return float(self.coefficients[0])


def _series_values(d: InterEventSeries, log_space: bool) -> np.ndarray:
    return np.log(d.deltas) if log_space else d.deltas


def autocorrelation(
    d: InterEventSeries, max_lag: int, log_space: bool = False
) -> AcfResult:
    """Sample autocorrelation at lags 1..max_lag with the white-noise band.

    ``log_space`` computes the coefficients on log-gaps, which is far
    more stable for heavy-tailed series; the raw-space default matches
    the textbook estimator.
    """
    n = len(d)
    if max_lag < 1:
        raise ParameterError(f"max_lag must be >= 1, got {max_lag}")
    if n <= max_lag:
        raise InsufficientDataError(f"need more than {max_lag} gaps, got {n}")
    x = _series_values(d, log_space)
    x = x - x.mean()
    denom = float(x @ x)
    if denom <= 0:
        raise DegenerateDataError("series has zero variance")
    coeffs = np.array([float(x[:-l] @ x[l:]) / denom for l in range(1, max_lag + 1)])
    return AcfResult(coefficients=coeffs, band=1.96 / math.sqrt(n), n=n)


def test_h1(acf: AcfResult) -> bool:
    """True when AC_1 exceeds the white-noise band (one-sided dependence test)."""
    return acf.ac1 > acf.band


def lag1_pearson(d: InterEventSeries, log_space: bool = True) -> float:
    """Pearson correlation of consecutive gap pairs (Delta_{k-1}, Delta_k).

    Defaults to log space: the raw-space estimator does not settle for
    infinite-variance marginals.
    """
    if len(d) < 3:
        raise InsufficientDataError(f"need >= 3 gaps, got {len(d)}")
    x = _series_values(d, log_space)
    if float(x.var()) <= 0:
        raise DegenerateDataError("series has zero variance")
    return float(np.corrcoef(x[:-1], x[1:])[0, 1])


def h1_proportion_by_count(
    results: "Sequence[FitResult]", bin_edges: Sequence[float]
) -> list[tuple[tuple[float, float], float | None]]:
    """Fraction of individuals with h1 = True, grouped by event count.

    Bins are [edge_i, edge_{i+1}); empty bins report None.
    """
    if not results:
        raise InsufficientDataError("no fit results to group")
    edges = np.asarray(bin_edges, dtype=float)
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ParameterError("bin_edges must be increasing with >= 2 entries")
    counts = np.array([r.n for r in results], dtype=float)
    flags = np.array([bool(r.h1) for r in results])
    which = np.digitize(counts, edges) - 1
    out: list[tuple[tuple[float, float], float | None]] = []
    for b in range(edges.size - 1):
        mask = which == b
        prop = float(flags[mask].mean()) if mask.any() else None
        out.append(((float(edges[b]), float(edges[b + 1])), prop))
    return out
