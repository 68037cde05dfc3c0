"""CSV/JSON interchange for event logs, fits, population models, anomalies.

Two CSV schemas and one JSON schema cover the whole pipeline: event logs
are ``individual_id,timestamp_s`` rows, fitted parameters are one row per
individual, and a population model is a small JSON document.  Statistical
outputs are written with six significant digits; timestamps keep full
precision so write/ingest round trips are exact.
"""

from __future__ import annotations

import contextlib
import csv
import json
import logging
import math
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .distributions import BivariateGaussianParams
from .errors import ParseError
from .fitting import FitResult
from .generators import EventSeries
from .population import AnomalyReport, PopulationModel

log = logging.getLogger(__name__)

EVENTS_HEADER = ["individual_id", "timestamp_s"]
FITS_HEADER = ["individual_id", "n", "rho", "mu", "log_mu", "r2", "ac1", "h1"]
ANOMALIES_HEADER = ["individual_id", "d2", "fit_ok", "label"]
OR_CURVE_HEADER = ["log_t", "log_or"]
ACF_HEADER = ["lag", "ac", "band"]


def _fmt(value: float) -> str:
    """Six significant digits; nan spelled out so readers can detect it."""
    if math.isnan(value):
        return "nan"
    return f"{value:.6g}"


def _fmt_timestamp(value: float) -> str:
    if float(value).is_integer() and abs(value) < 2**53:
        return str(int(value))
    return repr(float(value))


def _fmt_bool(value: bool) -> str:
    return "true" if value else "false"


def _parse_bool(text: str, line: int) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1"):
        return True
    if lowered in ("false", "0"):
        return False
    raise ParseError(f"expected a boolean, got {text!r}", line)


class _Sink:
    """Uniform writer over a path or an already-open text stream."""

    def __init__(self, target: str | Path | IO[str]):
        self._target = target
        self._fh: IO[str] | None = None
        self._own = False

    def __enter__(self) -> IO[str]:
        if hasattr(self._target, "write"):
            self._fh = self._target  # type: ignore[assignment]
        else:
            self._fh = open(self._target, "w", encoding="utf-8", newline="")
            self._own = True
        return self._fh

    def __exit__(self, *exc):
        if self._own and self._fh is not None:
            self._fh.close()
        return False


def _writer(fh: IO[str]) -> csv.writer:
    return csv.writer(fh, lineterminator="\n")


def write_events(series: Iterable[EventSeries], target) -> None:
    """Event-log CSV, one row per event, grouped by individual."""
    with _Sink(target) as fh:
        w = _writer(fh)
        w.writerow(EVENTS_HEADER)
        for ev in series:
            for t in ev.timestamps:
                w.writerow([ev.individual_id, _fmt_timestamp(t)])


def ingest_events(source, jitter: bool = False) -> list[EventSeries]:
    """Parse an event-log CSV into per-individual series.

    Records are grouped by id and sorted by time.  Duplicate timestamps
    within an individual collapse to a single event (with a logged
    warning); pass ``jitter=True`` to instead spread m duplicates evenly
    across half a unit so no event is lost.  Malformed rows raise
    ParseError with the offending line number.
    """
    with (open(source, encoding="utf-8", newline="") if not hasattr(source, "read")
          else contextlib.nullcontext(source)) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return []
        if [h.strip() for h in header] != EVENTS_HEADER:
            raise ParseError(
                f"expected header {','.join(EVENTS_HEADER)!r}, got {','.join(header)!r}",
                line=1,
            )
        groups: dict[str, list[float]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 fields, got {len(row)}", lineno)
            ind, raw_ts = row[0].strip(), row[1].strip()
            if not ind:
                raise ParseError("empty individual_id", lineno)
            try:
                ts = float(raw_ts)
            except ValueError:
                raise ParseError(f"unparseable timestamp {raw_ts!r}", lineno) from None
            if not math.isfinite(ts) or ts < 0:
                raise ParseError(f"timestamp must be finite and >= 0, got {raw_ts}", lineno)
            groups.setdefault(ind, []).append(ts)
    out = []
    for ind, stamps in groups.items():
        ordered = np.sort(np.asarray(stamps))
        values, counts = np.unique(ordered, return_counts=True)
        dup = int(counts.sum() - values.size)
        if dup:
            if jitter:
                parts = [
                    v + 0.5 * np.arange(m) / m for v, m in zip(values, counts)
                ]
                values = np.concatenate(parts)
                log.warning("individual %s: spread %d duplicate timestamps", ind, dup)
            else:
                log.warning("individual %s: collapsed %d duplicate timestamps", ind, dup)
        out.append(EventSeries(ind, values))
    return out


def write_fits(results: Iterable[FitResult], target) -> None:
    with _Sink(target) as fh:
        w = _writer(fh)
        w.writerow(FITS_HEADER)
        for r in results:
            w.writerow([
                r.individual_id,
                r.n,
                _fmt(r.rho),
                _fmt(r.mu),
                _fmt(math.log(r.mu)),
                _fmt(r.r2),
                _fmt(r.ac1),
                _fmt_bool(r.h1),
            ])


def read_fits(source) -> list[FitResult]:
    with (open(source, encoding="utf-8", newline="") if not hasattr(source, "read")
          else contextlib.nullcontext(source)) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return []
        if [h.strip() for h in header] != FITS_HEADER:
            raise ParseError(
                f"expected header {','.join(FITS_HEADER)!r}, got {','.join(header)!r}",
                line=1,
            )
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(FITS_HEADER):
                raise ParseError(f"expected {len(FITS_HEADER)} fields, got {len(row)}", lineno)
            try:
                out.append(FitResult(
                    individual_id=row[0],
                    n=int(row[1]),
                    rho=float(row[2]),
                    mu=float(row[3]),
                    r2=float(row[5]),
                    ac1=float(row[6]),
                    h1=_parse_bool(row[7], lineno),
                ))
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
    return out


def write_model(model: PopulationModel, target) -> None:
    """Population model as JSON with 6-significant-digit floats."""
    sig = lambda v: float(f"{float(v):.6g}")
    doc = {
        "system": model.system_name,
        "mean": [sig(v) for v in model.params.mean],
        "cov": [[sig(v) for v in row] for row in model.params.cov],
        "min_events": model.min_events,
    }
    with _Sink(target) as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def read_model(source) -> PopulationModel:
    with (open(source, encoding="utf-8") if not hasattr(source, "read")
          else contextlib.nullcontext(source)) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid model JSON: {exc}") from None
    try:
        params = BivariateGaussianParams(
            mean=np.asarray(doc["mean"], dtype=float),
            cov=np.asarray(doc["cov"], dtype=float),
        )
        return PopulationModel(
            params=params,
            system_name=str(doc.get("system", "custom")),
            min_events=int(doc.get("min_events", 30)),
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"model JSON missing or malformed field: {exc}") from None


def write_anomalies(reports: Iterable[AnomalyReport], target) -> None:
    with _Sink(target) as fh:
        w = _writer(fh)
        w.writerow(ANOMALIES_HEADER)
        for r in reports:
            w.writerow([r.individual_id, _fmt(r.d2), _fmt_bool(r.fit_ok), r.label])


def write_or_curve(curve, target) -> None:
    """Plot-ready odds-ratio curve: one (log_t, log_or) row per percentile."""
    with _Sink(target) as fh:
        w = _writer(fh)
        w.writerow(OR_CURVE_HEADER)
        for lt, lo in zip(curve.log_t, curve.log_or):
            w.writerow([_fmt(lt), _fmt(lo)])


def write_acf(acf, target) -> None:
    with _Sink(target) as fh:
        w = _writer(fh)
        w.writerow(ACF_HEADER)
        for lag, coeff in enumerate(acf.coefficients, start=1):
            w.writerow([lag, _fmt(coeff), _fmt(acf.band)])
