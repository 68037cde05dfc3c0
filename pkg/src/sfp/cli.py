"""Command-line interface.

Subcommands: generate, fit, or-curve, acf, population-fit, synth,
anomaly, verify.  Every run with a fixed seed and fixed inputs is
byte-reproducible.  Exit codes: 0 success, 1 usage error, 2 data error,
3 numeric error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import io as sfp_io
from .analysis import run_appendix_checks
from .distributions import RandomSource
from .errors import DataError, NumericError, ParameterError, SfpError, UsageError
from .fitting import fit_individual, inter_event_times, or_curve
from .generators import (
    InterEventSeries,
    SfpConfig,
    intervals_to_timestamps,
    poisson_process,
)
from .population import (
    DEFAULT_D2_THRESHOLD,
    DEFAULT_R2_THRESHOLD,
    SyntheticDatasetSpec,
    classify_anomaly,
    generate_dataset,
    get_system,
)
from .temporal import autocorrelation

SECONDS_PER_DAY = 86_400.0


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of calling sys.exit(2)."""

    def error(self, message):
        raise UsageError(message)


def _resolve_seed(value: int | None) -> int:
    """--seed flag, then the SFP_SEED environment variable, then 0."""
    if value is not None:
        return value
    env = os.environ.get("SFP_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"SFP_SEED must be an integer, got {env!r}") from None
    return 0


def _open_output(path: str):
    if path == "-":
        return sys.stdout
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sfp", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    p = sub.add_parser("generate",
                       help="generate one synthetic event series")
    p.add_argument("--model", required=True,
                   choices=["sfp", "sfp-star", "legacy", "pp"],
                   help="gap generator; legacy derives (C, a) from --mu/--rho, "
                        "pp treats --mu as the exponential mean")
    p.add_argument("--mu", type=float, required=True, help="target median, seconds")
    p.add_argument("--rho", type=float, default=1.0, help="odds-ratio slope target")
    p.add_argument("--n", type=int, required=True, help="number of gaps")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--theta", type=float, default=0.0,
                   help="dial overhead added to every gap, seconds")
    p.add_argument("--multi", action="store_true",
                   help="expand events to multiple recipients")
    p.add_argument("--recipient-mean", type=float, default=1.0)
    p.add_argument("--delay-mean", type=float, default=1.0)
    p.add_argument("--id", default="synthetic", help="individual id for the output")
    p.add_argument("--round-up", action="store_true",
                   help="round gaps up to whole seconds before emitting")
    p.add_argument("--output", default="-")

    p = sub.add_parser("fit",
                       help="fit every individual in an event-log CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--min-events", type=int, default=30)
    p.add_argument("--log-acf", action="store_true",
                   help="run the dependence test on log-gaps")
    p.add_argument("--jitter", action="store_true",
                   help="spread duplicate timestamps instead of collapsing them")
    p.add_argument("--output", default="-")

    p = sub.add_parser("or-curve",
                       help="per-percentile odds-ratio curve for one individual")
    p.add_argument("--input", required=True)
    p.add_argument("--individual", default=None,
                   help="id to extract (defaults to the only one present)")
    p.add_argument("--min-events", type=int, default=30)
    p.add_argument("--output", default="-")

    p = sub.add_parser("acf",
                       help="autocorrelation coefficients for one individual")
    p.add_argument("--input", required=True)
    p.add_argument("--individual", default=None)
    p.add_argument("--max-lag", type=int, default=10)
    p.add_argument("--log-space", action="store_true")
    p.add_argument("--output", default="-")

    p = sub.add_parser("population-fit",
                       help="fit the bivariate Gaussian over per-individual fits")
    p.add_argument("--fits", required=True, help="fits CSV from the fit subcommand")
    p.add_argument("--min-events", type=int, default=30)
    p.add_argument("--system-name", default="fitted")
    p.add_argument("--output", default="-")

    p = sub.add_parser("synth",
                       help="generate a full synthetic dataset from a population")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--system", help="built-in system name (see README)")
    group.add_argument("--model", help="population model JSON path")
    p.add_argument("--individuals", type=int, required=True)
    p.add_argument("--window-days", type=float, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", default="-")

    p = sub.add_parser("anomaly",
                       help="classify individuals against a population model")
    p.add_argument("--fits", required=True)
    p.add_argument("--model", required=True, help="population model JSON path")
    p.add_argument("--d2-threshold", type=float, default=DEFAULT_D2_THRESHOLD)
    p.add_argument("--r2-threshold", type=float, default=DEFAULT_R2_THRESHOLD)
    p.add_argument("--output", default="-")

    p = sub.add_parser("verify",
                       help="run the numeric verification suite, print JSON report")
    p.add_argument("--fast", action="store_true", help="reduced sample counts")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", default="-")

    return parser


def _pick_series(series, wanted):
    if not series:
        raise DataError("input file holds no events")
    if wanted is None:
        if len(series) > 1:
            raise UsageError(
                f"input holds {len(series)} individuals; pass --individual"
            )
        return series[0]
    for ev in series:
        if ev.individual_id == wanted:
            return ev
    raise DataError(f"individual {wanted!r} not found in input")


def _cmd_generate(args) -> int:
    rng = RandomSource(_resolve_seed(args.seed))
    try:
        if args.model == "pp":
            if args.multi or args.theta:
                raise UsageError("--multi/--theta decorate the sfp variants, not pp")
            series = poisson_process(args.mu, args.n, rng)
        else:
            variant = {"sfp": "general", "sfp-star": "star", "legacy": "legacy"}[args.model]
            config = SfpConfig(
                mu=args.mu,
                rho=args.rho,
                n=args.n,
                variant=variant,
                theta=args.theta,
                multi=args.multi,
                recipient_mean=args.recipient_mean,
                delay_mean=args.delay_mean,
            )
            series = config.generate(rng)
    except ParameterError as exc:
        # flag values are the only parameter source here
        raise UsageError(str(exc)) from None
    if args.round_up:
        series = InterEventSeries(np.ceil(series.deltas))
    ev = intervals_to_timestamps(series, t0=0.0, individual_id=args.id)
    sfp_io.write_events([ev], _open_output(args.output))
    return 0


def _cmd_fit(args) -> int:
    series = sfp_io.ingest_events(args.input, jitter=args.jitter)
    fits = []
    for ev in series:
        try:
            fits.append(fit_individual(ev, min_events=args.min_events,
                                       acf_log_space=args.log_acf))
        except DataError as exc:
            print(f"skipping {ev.individual_id}: {exc}", file=sys.stderr)
    sfp_io.write_fits(fits, _open_output(args.output))
    return 0


def _cmd_or_curve(args) -> int:
    series = sfp_io.ingest_events(args.input)
    ev = _pick_series(series, args.individual)
    curve = or_curve(inter_event_times(ev), min_events=args.min_events)
    sfp_io.write_or_curve(curve, _open_output(args.output))
    return 0


def _cmd_acf(args) -> int:
    series = sfp_io.ingest_events(args.input)
    ev = _pick_series(series, args.individual)
    acf = autocorrelation(inter_event_times(ev), max_lag=args.max_lag,
                          log_space=args.log_space)
    sfp_io.write_acf(acf, _open_output(args.output))
    return 0


def _cmd_population_fit(args) -> int:
    from .population import fit_population

    fits = sfp_io.read_fits(args.fits)
    model = fit_population(fits, min_events=args.min_events,
                           system_name=args.system_name)
    sfp_io.write_model(model, _open_output(args.output))
    return 0


def _cmd_synth(args) -> int:
    if args.system is not None:
        try:
            system: object = get_system(args.system)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
    else:
        system = sfp_io.read_model(args.model)
    try:
        spec = SyntheticDatasetSpec(
            system=system,
            n_individuals=args.individuals,
            window_T=args.window_days * SECONDS_PER_DAY,
        )
    except ParameterError as exc:
        raise UsageError(str(exc)) from None
    data = generate_dataset(spec, RandomSource(_resolve_seed(args.seed)))
    sfp_io.write_events(data, _open_output(args.output))
    return 0


def _cmd_anomaly(args) -> int:
    fits = sfp_io.read_fits(args.fits)
    model = sfp_io.read_model(args.model)
    reports = [
        classify_anomaly(f, model, d2_threshold=args.d2_threshold,
                         r2_threshold=args.r2_threshold)
        for f in fits
    ]
    sfp_io.write_anomalies(reports, _open_output(args.output))
    return 0


def _cmd_verify(args) -> int:
    report = run_appendix_checks(seed=_resolve_seed(args.seed), fast=args.fast)
    out = _open_output(args.output)
    text = json.dumps(report, indent=2) + "\n"
    if out is sys.stdout:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0 if report["all_passed"] else 3


_COMMANDS = {
    "generate": _cmd_generate,
    "fit": _cmd_fit,
    "or-curve": _cmd_or_curve,
    "acf": _cmd_acf,
    "population-fit": _cmd_population_fit,
    "synth": _cmd_synth,
    "anomaly": _cmd_anomaly,
    "verify": _cmd_verify,
}


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # argparse exits directly only for --help
            return int(exc.code or 0)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except (DataError, ParameterError, OSError, KeyError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except SfpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
