"""Self-feeding inter-event time generators and the Poisson baseline.

The core recursion draws each gap from an exponential whose mean is the
previous gap plus a floor constant, so rapid bursts feed rapid follow-ups
and long silences feed long silences.  Variants reshape the marginal
(power transform), loosen the coupling (lagged feedback), or post-process
the output (dial overhead, multi-recipient expansion).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import RandomSource
from .errors import DataError, NumericError, ParameterError


@dataclass(eq=False)
class InterEventSeries:
    """Ordered gaps Delta_1..Delta_n between consecutive events, in seconds."""

    deltas: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.deltas, dtype=float).reshape(-1)
        if d.size and (not np.all(np.isfinite(d)) or np.any(d <= 0)):
            raise DataError("inter-event times must be positive and finite")
        self.deltas = d

    def __len__(self):
        return self.deltas.size


@dataclass(eq=False)
class EventSeries:
    """One individual's event timestamps, strictly increasing, seconds."""

    individual_id: str
    timestamps: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.timestamps, dtype=float).reshape(-1)
        if t.size:
            if not np.all(np.isfinite(t)) or t[0] < 0:
                raise DataError("timestamps must be finite and nonnegative")
            if np.any(np.diff(t) <= 0):
                raise DataError("timestamps must be strictly increasing")
        self.timestamps = t

    def __len__(self):
        return self.timestamps.size


def _feedback_chain(start: float, c: float, n: int, rng: RandomSource) -> np.ndarray:
    """Run the chain x_1 = start, x_k ~ Exponential(mean x_{k-1} + c)."""
    out = np.empty(n)
    out[0] = start
    if n > 1:
        draws = -np.log(rng.uniforms(n - 1))
        prev = start
        k = 1
        for e in draws:
            prev = (prev + c) * e
            out[k] = prev
            k += 1
    return out


def _check_generation_args(mu: float, n: int, name: str = "mu"):
    if not (mu > 0 and math.isfinite(mu)):
        raise ParameterError(f"{name} must be positive and finite, got {mu}")
    if n < 1:
        raise ParameterError(f"n must be at least 1, got {n}")


def sfp_simple(mu: float, n: int, rng: RandomSource) -> InterEventSeries:
    """One-parameter self-feeding process.

    Delta_1 = mu; Delta_k ~ Exponential(mean Delta_{k-1} + mu/e).  The
    marginal median converges to mu and the odds-ratio slope to 1.
    """
    _check_generation_args(mu, n)
    return InterEventSeries(_feedback_chain(mu, mu / math.e, n, rng))


def sfp_general(mu: float, rho: float, n: int, rng: RandomSource) -> InterEventSeries:
    """Two-parameter self-feeding process with target median mu and slope rho.

    An internal chain delta_1 = mu, delta_t ~ Exponential(mean
    delta_{t-1} + mu^rho/e) is emitted as Delta_k = delta_t^(1/rho).
    With rho = 1 this reduces bit-for-bit to :func:`sfp_simple`.
    """
    _check_generation_args(mu, n)
    if not (rho > 0 and math.isfinite(rho)):
        raise ParameterError(f"rho must be positive and finite, got {rho}")
    chain = _feedback_chain(mu, mu**rho / math.e, n, rng)
    return InterEventSeries(chain ** (1.0 / rho))


def sfp_legacy(c: float, a: float, n: int, rng: RandomSource) -> InterEventSeries:
    """Location/shape parametrization: delta_1 = C, floor C, output delta^a.

    The emitted median grows linearly in C (slope e) and the fitted
    odds-ratio slope equals 1/a.
    """
    _check_generation_args(c, n, name="c")
    if not (a > 0 and math.isfinite(a)):
        raise ParameterError(f"a must be positive and finite, got {a}")
    return InterEventSeries(_feedback_chain(c, c, n, rng) ** a)


def sfp_star(mu: float, n: int, rng: RandomSource) -> InterEventSeries:
    """Lagged self-feeding process with weaker consecutive correlation.

    A lag eps = ceil(Exponential(1)) is drawn once per series and every
    step feeds on Delta_{k-eps}; references before the start fall back to
    Delta_1.  With eps = 1 this is exactly the plain process; larger lags
    interleave nearly independent chains, which is what pulls the average
    consecutive correlation down across individuals while leaving the
    marginal law untouched.  Draw order: one lag draw, then n-1 gap draws.
    """
    _check_generation_args(mu, n)
    out = np.empty(n)
    out[0] = mu
    if n > 1:
        eps = int(math.ceil(-math.log(rng.uniform())))
        draws = -np.log(rng.uniforms(n - 1))
        floor = mu / math.e
        for k in range(1, n):
            ref = k - eps
            if ref < 0:
                ref = 0
            out[k] = (out[ref] + floor) * draws[k - 1]
    return InterEventSeries(out)


def poisson_process(beta: float, n: int, rng: RandomSource) -> InterEventSeries:
    """i.i.d. exponential gaps with mean beta: the memoryless baseline."""
    _check_generation_args(beta, n, name="beta")
    return InterEventSeries(-beta * np.log(rng.uniforms(n)))


def with_dial_overhead(series: InterEventSeries, theta: float) -> InterEventSeries:
    """Add a constant per-call setup time theta to every gap.

    The overhead is applied to the output only; it never enters the
    feedback mean, so the core chain's stationary law is unchanged.
    """
    if theta < 0 or not math.isfinite(theta):
        raise ParameterError(f"theta must be nonnegative and finite, got {theta}")
    return InterEventSeries(series.deltas + theta)


def expand_multi_recipient(
    series: InterEventSeries,
    recipient_mean: float = 1.0,
    delay_mean: float = 1.0,
    rng: RandomSource | None = None,
) -> InterEventSeries:
    """Fan each event out to r = ceil(Exponential(recipient_mean)) recipients.

    Gaps are anchored at an origin event at t = 0, so every event implied
    by the input series (including the origin) draws its own recipient
    count; copies beyond the first are shifted by independent
    Exponential(delay_mean) delays.  The merged event set is re-sorted
    and gaps are recomputed, so with r = 1 everywhere the series is
    returned unchanged.
    """
    if rng is None:
        raise ParameterError("expand_multi_recipient requires a RandomSource")
    if recipient_mean <= 0 or delay_mean <= 0:
        raise ParameterError("recipient_mean and delay_mean must be positive")
    times = np.concatenate([[0.0], np.cumsum(series.deltas)])
    counts = np.ceil(-np.log(rng.uniforms(times.size)) * recipient_mean).astype(np.int64)
    extras = []
    for t, r in zip(times, counts):
        if r > 1:
            extras.append(t - delay_mean * np.log(rng.uniforms(r - 1)))
    if extras:
        times = np.sort(np.concatenate([times] + extras))
    gaps = np.diff(times)
    return InterEventSeries(gaps[gaps > 0])


def intervals_to_timestamps(
    series: InterEventSeries, t0: float = 0.0, individual_id: str = "synthetic"
) -> EventSeries:
    """Prefix-sum gaps into event times: timestamps[k] = t0 + sum(deltas[:k+1]).

    The origin event at t0 itself is not emitted; feeding the result back
    through gap extraction therefore recovers deltas[1:], or all deltas
    once the origin is prepended.
    """
    if t0 < 0 or not math.isfinite(t0):
        raise ParameterError(f"t0 must be nonnegative and finite, got {t0}")
    return EventSeries(individual_id, t0 + np.cumsum(series.deltas))


@dataclass
class SfpConfig:
    """Declarative description of one generation request.

    ``variant`` picks the base chain (simple, general, legacy, star);
    ``theta`` adds dial overhead and ``multi`` applies recipient
    expansion, both after the base gaps are drawn.  For the legacy
    variant, ``legacy_c``/``legacy_a`` default to mu^rho/e and 1/rho so
    the requested median and slope are preserved.
    """

    mu: float
    n: int
    rho: float = 1.0
    variant: str = "general"
    theta: float = 0.0
    multi: bool = False
    recipient_mean: float = 1.0
    delay_mean: float = 1.0
    legacy_c: float | None = None
    legacy_a: float | None = None

    _VARIANTS = ("simple", "general", "legacy", "star")

    def __post_init__(self):
        _check_generation_args(self.mu, self.n)
        if self.variant not in self._VARIANTS:
            raise ParameterError(
                f"unknown variant {self.variant!r}; expected one of {self._VARIANTS}"
            )
        if self.rho <= 0:
            raise ParameterError(f"rho must be positive, got {self.rho}")
        if self.theta < 0:
            raise ParameterError(f"theta must be nonnegative, got {self.theta}")
        if self.recipient_mean <= 0 or self.delay_mean <= 0:
            raise ParameterError("recipient_mean and delay_mean must be positive")

    def generate(self, rng: RandomSource) -> InterEventSeries:
        if self.variant == "simple":
            series = sfp_simple(self.mu, self.n, rng)
        elif self.variant == "star":
            series = sfp_star(self.mu, self.n, rng)
        elif self.variant == "legacy":
            c = self.mu**self.rho / math.e if self.legacy_c is None else self.legacy_c
            a = 1.0 / self.rho if self.legacy_a is None else self.legacy_a
            series = sfp_legacy(c, a, self.n, rng)
        else:
            series = sfp_general(self.mu, self.rho, self.n, rng)
        if self.multi:
            series = expand_multi_recipient(
                series, self.recipient_mean, self.delay_mean, rng
            )
        if self.theta > 0:
            series = with_dial_overhead(series, self.theta)
        return series


def gaps_within_window(
    mu: float,
    rho: float,
    window: float,
    rng: RandomSource,
    chunk: int = 4096,
    max_events: int = 10_000_000,
) -> InterEventSeries:
    """Longest prefix of self-feeding gaps whose cumulative sum stays < window.

    Generates the chain lazily in chunks so bursty individuals with tens
    of thousands of events in the window do not require guessing a count
    up front.  ``max_events`` guards against pathological populations
    whose median is vanishingly small relative to the window.
    """
    _check_generation_args(mu, 1)
    if window <= 0:
        raise ParameterError(f"window must be positive, got {window}")
    inv_rho = 1.0 / rho
    c = mu**rho / math.e
    prev = mu
    first = mu**inv_rho
    if first >= window:
        return InterEventSeries(np.empty(0))
    kept = [first]
    total = first
    while True:
        draws = -np.log(rng.uniforms(chunk))
        for e in draws:
            prev = (prev + c) * e
            gap = prev**inv_rho
            total += gap
            if total >= window:
                return InterEventSeries(np.array(kept))
            kept.append(gap)
            if len(kept) >= max_events:
                raise NumericError(
                    f"window admits more than {max_events} events; "
                    "refusing to generate an unbounded series"
                )
