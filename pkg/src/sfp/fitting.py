"""Per-individual characterization of inter-event time distributions.

The workhorse is the odds-ratio curve: for each percentile t_q of the
gaps, plot log(q/(100-q)) against log(t_q).  A straight line there means
the marginal is log-logistic; ordinary least squares recovers the slope
``rho`` and, from the intercept, the median ``mu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .distributions import ExponentialParams
from .errors import DataError, DegenerateDataError, InsufficientDataError, ParameterError
from .generators import EventSeries, InterEventSeries
from .temporal import autocorrelation, test_h1

DEFAULT_MIN_EVENTS = 30


@dataclass(eq=False)
class OrCurve:
    """Per-percentile odds-ratio points (natural logs).

    ``log_or`` is strictly increasing by construction; the point at the
    median percentile has log_or = 0.
    """

    levels: np.ndarray
    log_t: np.ndarray
    log_or: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.log_t, self.log_or])

    def __len__(self):
        return self.levels.size


@dataclass
class FitResult:
    """Fitted odds-ratio power law for one individual.

    ``ac1``/``h1`` hold the lag-1 autocorrelation and the dependence
    verdict when the temporal test has been run; they default to
    nan/False otherwise.
    """

    individual_id: str
    n: int
    rho: float
    mu: float
    r2: float
    ac1: float = math.nan
    h1: bool = False

    @property
    def log_mu(self) -> float:
        return math.log(self.mu)


def inter_event_times(ev: EventSeries) -> InterEventSeries:
    """Gaps between consecutive events; needs at least two timestamps."""
    if len(ev) < 2:
        raise InsufficientDataError(
            f"{ev.individual_id or 'series'}: need >= 2 events, got {len(ev)}"
        )
    deltas = np.diff(ev.timestamps)
    if np.any(deltas <= 0):
        raise DataError("timestamps are not strictly increasing")
    return InterEventSeries(deltas)


def or_curve(
    d: InterEventSeries,
    min_events: int = DEFAULT_MIN_EVENTS,
    levels: tuple[int, int] = (1, 99),
) -> OrCurve:
    """Empirical odds-ratio curve over percentiles P_levels[0]..P_levels[1].

    Percentiles use linear interpolation between order statistics at the
    (n+1)-based plotting positions, so a sample holding the exact
    quantiles at levels 1..99 reproduces them untouched.  P_100 is never
    used: its odds ratio is infinite.
    """
    lo, hi = levels
    if not (1 <= lo <= hi <= 99):
        raise ParameterError("percentile range must sit inside [1, 99]")
    n = len(d)
    if n < min_events:
        raise InsufficientDataError(f"need >= {min_events} gaps, got {n}")
    qs = np.arange(lo, hi + 1, dtype=float)
    t = np.percentile(d.deltas, qs, method="weibull")
    if np.any(t <= 0):
        raise DataError("percentile values must be positive; pre-filter zero gaps")
    return OrCurve(levels=qs, log_t=np.log(t), log_or=np.log(qs / (100.0 - qs)))


def fit_or_powerlaw(c: OrCurve, individual_id: str = "", n_events: int = 0) -> FitResult:
    """Least-squares line through the odds-ratio curve.

    slope -> rho, exp(-intercept/slope) -> mu, plus the standard
    determination coefficient R^2 of the regression.
    """
    m = len(c)
    if m < 10:
        raise InsufficientDataError(f"need >= 10 curve points, got {m}")
    x, y = c.log_t, c.log_or
    vx = x - x.mean()
    sxx = float(vx @ vx)
    if sxx <= 0:
        raise DegenerateDataError("log t has zero variance; cannot regress")
    slope = float(vx @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    sstot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float(resid @ resid) / sstot
    return FitResult(
        individual_id=individual_id,
        n=n_events,
        rho=slope,
        mu=math.exp(-intercept / slope),
        r2=r2,
    )


def fit_exponential(d: InterEventSeries) -> ExponentialParams:
    """Memoryless baseline: the MLE of the exponential mean is the sample mean."""
    if len(d) < 2:
        raise InsufficientDataError(f"need >= 2 gaps, got {len(d)}")
    return ExponentialParams(beta=float(d.deltas.mean()))


def fit_powerlaw_mle(
    d: InterEventSeries,
    min_tail: int = 20,
    max_candidates: int = 256,
) -> tuple[float, float]:
    """Continuous power-law tail fit: alpha_hat, xmin.

    For each candidate xmin taken from the observed values, the tail
    exponent is the Hill/MLE estimate alpha = 1 + m / sum(log(x/xmin))
    and the candidate minimizing the Kolmogorov-Smirnov distance between
    the empirical tail and the fitted power law wins.  Candidate count is
    capped at ``max_candidates`` evenly spaced order statistics, which
    leaves the selection indistinguishable in practice on large samples.
    """
    x = np.sort(d.deltas)
    n = x.size
    if n < 50:
        raise InsufficientDataError(f"need >= 50 gaps for a tail fit, got {n}")
    logs = np.log(x)
    suffix = np.concatenate([np.cumsum(logs[::-1])[::-1], [0.0]])
    unique_idx = np.flatnonzero(np.diff(x, prepend=-np.inf) > 0)
    unique_idx = unique_idx[unique_idx <= n - min_tail]
    if unique_idx.size == 0:
        raise InsufficientDataError(
            f"no candidate xmin leaves >= {min_tail} tail points"
        )
    if unique_idx.size > max_candidates:
        pick = np.linspace(0, unique_idx.size - 1, max_candidates).round().astype(int)
        unique_idx = unique_idx[np.unique(pick)]
    best = None
    for i in unique_idx:
        xmin = x[i]
        m = n - i
        denom = suffix[i] - m * logs[i]
        if denom <= 0:
            continue
        alpha = 1.0 + m / denom
        tail = x[i:]
        fitted = 1.0 - (tail / xmin) ** (1.0 - alpha)
        steps = np.arange(m + 1) / m
        ks = max(
            float(np.abs(fitted - steps[1:]).max()),
            float(np.abs(fitted - steps[:-1]).max()),
        )
        if best is None or ks < best[0]:
            best = (ks, alpha, float(xmin))
    if best is None:
        raise DegenerateDataError("all tails are constant; no power law to fit")
    return best[1], best[2]


def fit_individual(
    ev: EventSeries,
    min_events: int = DEFAULT_MIN_EVENTS,
    acf_log_space: bool = False,
) -> FitResult:
    """Full per-individual pipeline: gaps, OR curve, power-law fit, AC1 test.

    ``min_events`` counts events, so an individual with exactly 30 events
    (29 gaps) qualifies at the default threshold.
    """
    if len(ev) < min_events:
        raise InsufficientDataError(
            f"{ev.individual_id or 'series'}: need >= {min_events} events, got {len(ev)}"
        )
    d = inter_event_times(ev)
    curve = or_curve(d, min_events=max(min_events - 1, 10))
    fit = fit_or_powerlaw(curve, individual_id=ev.individual_id, n_events=len(ev))
    try:
        acf = autocorrelation(d, max_lag=1, log_space=acf_log_space)
    except DegenerateDataError:
        return fit
    return replace(fit, ac1=float(acf.coefficients[0]), h1=test_h1(acf))
