"""Command-line interface.

    dsdcarbon decompose --input data.csv --manifest data.manifest --out out/
    dsdcarbon compare   --input data.csv --manifest data.manifest --out out/
    dsdcarbon metrics   --input data.csv --manifest data.manifest --out out/
    dsdcarbon scenario  --preset china --input data.csv --manifest data.manifest --out out/
    dsdcarbon fixture   --out data/ --seed 1

Exit codes: 0 success, 2 validation or usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from importlib import resources
from pathlib import Path

from . import __version__
from . import report as rep
from .dsd import (
    chain_decompositions,
    decompose_period,
    default_segments,
    parse_stages,
)
from .errors import NumericalError, ValidationError
from .ingest import generate_fixture, load_csv, load_manifest, save_csv
from .lmdi import compare_dsd_lmdi, lmdi_first_layer, paired_points
from .metrics import scale_report
from .model import CountrySeries, intensity_series
from .scenario import ScenarioParams, params_from_mapping, project_avoided

log = logging.getLogger("dsdcarbon")

FORMATS = ("csv", "json", "svg")


def _formats(text: str) -> list[str]:
    out = [f.strip() for f in text.split(",") if f.strip()]
    for f in out:
        if f not in FORMATS:
            raise argparse.ArgumentTypeError(f"unknown format {f!r} (choose from csv, json, svg)")
    return out


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _data_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--input", required=True, type=Path, help="country CSV file")
    p.add_argument("--manifest", type=Path,
                   help="manifest file (default: '#@' pragma lines in the CSV)")
    p.add_argument("--country", help="expected country id; mismatch is an error")
    p.add_argument("--from", dest="year_from", type=int, help="first year (default: series start)")
    p.add_argument("--to", dest="year_to", type=int, help="last year (default: series end)")
    p.add_argument("--segments", type=_positive_int, default=None,
                   help="Euler segments per period (default 16000, env DSD_SEGMENTS)")
    p.add_argument("--stages", help='stage list like "2000-2005,2005-2010" '
                                    "(default: consecutive five-year stages)")
    p.add_argument("--format", type=_formats, default=["csv"],
                   help="comma-separated subset of csv,json,svg (default csv)")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dsdcarbon",
        description="Carbon-intensity decomposition of residential building operations.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    data = _data_parent()
    sub.add_parser("decompose", parents=[data], help="DSD decomposition by year and stage")
    cmp_ = sub.add_parser("compare", parents=[data], help="DSD vs two-layer LMDI regression")
    cmp_.add_argument("--weighting", choices=("end_use", "aggregate"), default="end_use",
                      help="LMDI log-mean weighting (default end_use)")
    met = sub.add_parser("metrics", parents=[data], help="decarbonization scales")
    met.add_argument("--floor-area", action="store_true",
                     help="require the per-floor-area scale (error if floor area is missing)")

    scen = sub.add_parser("scenario", help="avoided emissions from electrification")
    scen.add_argument("--config", type=Path, help="key-value scenario file")
    scen.add_argument("--preset", choices=("china",), help="bundled parameter set")
    scen.add_argument("--input", type=Path, help="series used to derive base-year energy per household")
    scen.add_argument("--manifest", type=Path)
    scen.add_argument("--format", type=_formats, default=["csv"])
    scen.add_argument("--out", type=Path, default=Path("."))
    for f in fields(ScenarioParams):
        scen.add_argument(f"--{f.name.replace('_', '-')}", dest=f"p_{f.name}", metavar="VALUE")

    fix = sub.add_parser("fixture", help="write the synthetic fixture CSV and manifest")
    fix.add_argument("--seed", type=int, default=1)
    fix.add_argument("--years", type=int, default=21)
    fix.add_argument("--m", type=int, default=6, help="number of end uses (5 drops space heating)")
    fix.add_argument("--start-year", type=int, default=2000)
    fix.add_argument("--name", default="fixture", help="output file stem")
    fix.add_argument("--out", type=Path, default=Path("."))
    return parser


def _load(args) -> tuple[CountrySeries, str]:
    manifest = load_manifest(args.manifest) if args.manifest else None
    series = load_csv(args.input, manifest)
    if args.country and args.country != series.country:
        raise ValidationError(f"input is for country {series.country!r}, not {args.country!r}")
    years = series.years
    if len(years) < 2:
        raise ValidationError("series needs at least two years")
    start = years[0] if args.year_from is None else args.year_from
    end = years[-1] if args.year_to is None else args.year_to
    if start not in years or end not in years or end <= start:
        raise ValidationError(f"--from/--to {start}-{end} outside series range {years[0]}-{years[-1]}")
    digest = rep.input_hash(args.input, args.manifest)
    return series.window(start, end), digest


def _stages(args, series: CountrySeries) -> list[tuple[int, int]]:
    if args.stages:
        return parse_stages(args.stages)
    years = series.years
    bounds = list(range(years[0], years[-1], 5)) + [years[-1]]
    return list(zip(bounds, bounds[1:]))


def _segments(args) -> int:
    return args.segments if args.segments is not None else default_segments()


def cmd_decompose(args) -> int:
    series, digest = _load(args)
    N = _segments(args)
    states = intensity_series(series)
    stages = _stages(args, series)
    chain = chain_decompositions(states, stages, N)
    years = series.years
    horizon = decompose_period(states[years[0]], states[years[-1]], N)
    meta = rep.make_meta(N, digest)
    out = args.out
    written = []
    written += rep.write_table(out, "contributions_yearly", rep.contribution_table(chain.yearly),
                               meta, args.format)
    written += rep.write_table(out, "contributions_stages", rep.stage_table(chain, horizon),
                               meta, args.format)
    written += rep.write_table(out, "contributions_cumulative",
                               rep.contribution_table(chain.cumulative), meta, args.format)
    base_c = states[years[0]].c
    rate_tables = chain.stages + [horizon]
    labels = [f"{t.period[0]}-{t.period[1]}" for t in chain.stages] + ["horizon"]
    written += rep.write_table(out, "rates", rep.rates_table(rate_tables, labels, base_c),
                               meta, args.format)
    if "svg" in args.format:
        written.append(rep.write_svg(out, "fig3", rep.fig3_chart(
            chain.stages, f"{series.country}: stage contributions to carbon intensity change")))
        written.append(rep.write_svg(out, "fig4", rep.fig4_chart(
            chain.cumulative, f"{series.country}: cumulative driver contributions")))
        written.append(rep.write_svg(out, "fig5", rep.fig5_chart(
            chain.stages, f"{series.country}: structural change effects by end use")))
    worst = max((abs(t.residual) for t in chain.yearly), default=0.0)
    log.info("wrote %d files; largest yearly residual %.3e", len(written), worst)
    return 0


def cmd_compare(args) -> int:
    series, digest = _load(args)
    N = _segments(args)
    states = intensity_series(series)
    stages = _stages(args, series)
    chain = chain_decompositions(states, stages, N)
    lmdi = [lmdi_first_layer(states[a], states[b], args.weighting) for a, b in stages]
    pairs = paired_points(chain.stages, lmdi)
    stats = compare_dsd_lmdi([p[1] for p in pairs], [p[2] for p in pairs], [p[0] for p in pairs])
    meta = rep.make_meta(N, digest)
    rep.write_table(args.out, "paired_contributions", rep.paired_table(pairs), meta, args.format)
    rep.write_table(args.out, "lmdi", rep.lmdi_table(lmdi), meta, args.format)
    rep.write_table(args.out, "regression", rep.regression_table(stats), meta, args.format)
    log.info("R2=%.6f slope=%.6f sign agreement %d/%d", stats.r_squared, stats.slope,
             stats.sign_agreement, stats.n_points)
    return 0


def cmd_metrics(args) -> int:
    series, digest = _load(args)
    N = _segments(args)
    states = intensity_series(series)
    stages = _stages(args, series)
    chain = chain_decompositions(states, (), N)
    report = scale_report(chain.yearly, series, stages, True if args.floor_area else None)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    meta = rep.make_meta(N, digest)
    rep.write_table(args.out, "decarb_report", rep.decarb_table(report), meta, args.format)
    if "svg" in args.format:
        rep.write_svg(args.out, "fig6", rep.fig6_chart(
            report, f"{series.country}: total decarbonization"))
        rep.write_svg(args.out, "fig7", rep.fig7_chart(
            report, f"{series.country}: decarbonization scales"))
    return 0


def _preset_values(name: str) -> dict[str, str]:
    from .ingest import parse_key_values

    text = resources.files("dsdcarbon").joinpath("data", f"{name}_2030.cfg").read_text("utf-8")
    return parse_key_values(text, f"preset {name}")


def cmd_scenario(args) -> int:
    from .ingest import read_key_values

    values: dict[str, str] = {}
    if args.preset:
        values.update(_preset_values(args.preset))
    if args.config:
        values.update(read_key_values(args.config))
    for f in fields(ScenarioParams):
        v = getattr(args, f"p_{f.name}")
        if v is not None:
            values[f.name] = v
            # a flag overrides the kgce factor, so drop a now-stale kWh check value
            values.pop(f"{f.name}_kwh", None)
    params = params_from_mapping(values)
    series = None
    digest_paths = [args.config]
    if args.input is not None:
        manifest = load_manifest(args.manifest) if args.manifest else None
        series = load_csv(args.input, manifest)
        digest_paths += [args.input, args.manifest]
    result = project_avoided(params, series)
    meta = rep.make_meta(None, rep.input_hash(*digest_paths))
    rep.write_table(args.out, "scenario", rep.scenario_table(params, result), meta, args.format)
    print(f"avoided emissions at {params.horizon_year}: {result.avoided_mt:.2f} MtCO2 "
          "(assumption-sensitive)")
    return 0


def cmd_fixture(args) -> int:
    series = generate_fixture(args.seed, args.years, args.m, args.start_year)
    args.out.mkdir(parents=True, exist_ok=True)
    save_csv(series, args.out / f"{args.name}.csv", args.out / f"{args.name}.manifest")
    return 0


COMMANDS = {
    "decompose": cmd_decompose,
    "compare": cmd_compare,
    "metrics": cmd_metrics,
    "scenario": cmd_scenario,
    "fixture": cmd_fixture,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if "format" in args and "svg" in args.format and args.command == "scenario":
        parser.error("scenario has no SVG output")
    try:
        return COMMANDS[args.command](args)
    except NumericalError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
