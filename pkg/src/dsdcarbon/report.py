"""Tabular report builders and CSV/JSON/SVG writers.

Every CSV ends with a metadata comment line
``# tool=dsdcarbon, version=..., N=..., input_sha256=...``; the JSON form
carries the same rows as objects plus a ``meta`` block.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__
from .dsd import AGGREGATE_DRIVERS, ChainResult, ContributionTable, contribution_rates
from .ingest import atomic_write_text
from .lmdi import LmdiTable, RegressionStats
from .metrics import DecarbReport
from .scenario import ScenarioParams, ScenarioResult
from .svg import ChartSpec, emit_svg

TOOL = "dsdcarbon"


@dataclass
class Table:
    columns: list[str]
    rows: list[list[object]] = field(default_factory=list)


def input_hash(*paths: str | Path | None) -> str:
    h = hashlib.sha256()
    for p in paths:
        if p is None:
            continue
        h.update(Path(p).read_bytes())
    return h.hexdigest()


def _cell(v: object) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        s = format(v, ".12g")
        return "0" if s == "-0" else s
    return str(v)


def _json_value(v: object) -> object:
    if isinstance(v, float):
        if not math.isfinite(v):
            return None
        return float(_cell(v))
    return v


def meta_line(meta: dict[str, object]) -> str:
    return "# " + ", ".join(f"{k}={v}" for k, v in meta.items())


def table_to_csv(table: Table, meta: dict[str, object]) -> str:
    lines = [",".join(table.columns)]
    for row in table.rows:
        lines.append(",".join(_cell(v) for v in row))
    lines.append(meta_line(meta))
    return "\n".join(lines) + "\n"


def table_to_json(table: Table, meta: dict[str, object]) -> str:
    rows = [{c: _json_value(v) for c, v in zip(table.columns, row)} for row in table.rows]
    return json.dumps({"meta": meta, "columns": table.columns, "rows": rows}, indent=2) + "\n"


def write_table(out_dir: Path, stem: str, table: Table, meta: dict[str, object],
                formats: Sequence[str]) -> list[Path]:
    written = []
    if "csv" in formats:
        path = out_dir / f"{stem}.csv"
        atomic_write_text(path, table_to_csv(table, meta))
        written.append(path)
    if "json" in formats:
        path = out_dir / f"{stem}.json"
        atomic_write_text(path, table_to_json(table, meta))
        written.append(path)
    return written


def write_svg(out_dir: Path, stem: str, chart: ChartSpec) -> Path:
    path = out_dir / f"{stem}.svg"
    atomic_write_text(path, emit_svg(chart))
    return path


def make_meta(N: int | None, digest: str) -> dict[str, object]:
    return {"tool": TOOL, "version": __version__, "N": N if N is not None else "na",
            "input_sha256": digest}


# decomposition tables

def contribution_table(tables: Sequence[ContributionTable], labels: Sequence[str] | None = None) -> Table:
    if not tables:
        return Table(["label", "period_start", "period_end", "delta_c", "residual", "segments"])
    keys = list(tables[0].by_driver)
    cols = (["label", "period_start", "period_end", "c_start", "c_end", "delta_c"] + keys
            + ["k_total", "w_total", "residual", "segments"])
    out = Table(cols)
    for i, t in enumerate(tables):
        label = labels[i] if labels else f"{t.period[0]}-{t.period[1]}"
        out.rows.append(
            [label, t.period[0], t.period[1], t.c_start, t.c_end, t.delta_c]
            + [t.by_driver[k] for k in keys]
            + [t.k_total, t.w_total, t.residual, t.segments]
        )
    return out


def stage_table(chain: ChainResult, horizon: ContributionTable | None = None) -> Table:
    tables, labels = [], []
    for st, ss in zip(chain.stages, chain.stage_sums):
        tag = f"{st.period[0]}-{st.period[1]}"
        tables += [st, ss]
        labels += [f"{tag}:direct", f"{tag}:yearly_sum"]
    if horizon is not None:
        tables.append(horizon)
        labels.append(f"{horizon.period[0]}-{horizon.period[1]}:horizon")
    return contribution_table(tables, labels)


def rates_table(tables: Sequence[ContributionTable], labels: Sequence[str], base_c: float) -> Table:
    if not tables:
        return Table(["label", "base_c"])
    first = contribution_rates(tables[0], base_c)
    keys = list(first)
    out = Table(["label", "period_start", "period_end", "base_c"] + [f"rate_{k}" for k in keys])
    for label, t in zip(labels, tables):
        r = contribution_rates(t, base_c)
        out.rows.append([label, t.period[0], t.period[1], base_c] + [r[k] for k in keys])
    return out


def fig3_chart(tables: Sequence[ContributionTable], title: str) -> ChartSpec:
    cats = [f"{t.period[0]}-{t.period[1]}" for t in tables]
    series = [(d, [t.aggregates()[d] for t in tables]) for d in AGGREGATE_DRIVERS]
    return ChartSpec("stacked_bar", title, cats, series, "kgCO2 per household")


def fig4_chart(cumulative: Sequence[ContributionTable], title: str) -> ChartSpec:
    cats = [str(t.period[1]) for t in cumulative]
    series = [(d, [t.aggregates()[d] for t in cumulative]) for d in AGGREGATE_DRIVERS]
    series.append(("total", [t.delta_c for t in cumulative]))
    return ChartSpec("line", title, cats, series, "cumulative kgCO2 per household")


def fig5_chart(tables: Sequence[ContributionTable], title: str) -> ChartSpec:
    cats = [f"{t.period[0]}-{t.period[1]}" for t in tables]
    uses = tables[0].end_uses if tables else ()
    series = [(u, [t.by_driver[f"w:{u}"] for t in tables]) for u in uses]
    return ChartSpec("stacked_bar", title, cats, series, "kgCO2 per household")


# LMDI comparison

def lmdi_table(tables: Sequence[LmdiTable]) -> Table:
    if not tables:
        return Table(["period_start", "period_end"])
    uses = tables[0].end_uses
    cols = (["period_start", "period_end", "delta_c", "p", "g", "s", "e", "k"]
            + [f"k:{u}" for u in uses] + ["k_layer2_total", "layer_gap", "weighting", "substituted"])
    out = Table(cols)
    for t in tables:
        out.rows.append(
            [t.period[0], t.period[1], t.delta_c]
            + [t.by_driver[d] for d in ("p", "g", "s", "e", "k")]
            + [t.k_by_end_use[u] for u in uses]
            + [t.k_layer2_total, t.layer_gap, t.weighting, ";".join(t.substituted)]
        )
    return out


def paired_table(pairs: Sequence[tuple[str, float, float]]) -> Table:
    out = Table(["label", "dsd", "lmdi", "difference", "same_sign"])
    for label, d, l in pairs:
        out.rows.append([label, d, l, l - d, int((d > 0) == (l > 0) and (d < 0) == (l < 0))])
    return out


def regression_table(stats: RegressionStats) -> Table:
    return Table(
        ["slope", "intercept", "r_squared", "ci95_halfwidth", "n_points",
         "quadrant_I_III", "quadrant_II_IV"],
        [[stats.slope, stats.intercept, stats.r_squared, stats.ci95_halfwidth,
          stats.n_points, stats.sign_agreement, stats.n_points - stats.sign_agreement]],
    )


# decarbonization scales

def decarb_table(report: DecarbReport) -> Table:
    cols = ["scope", "period_start", "period_end", "Dc_intensity", "DC_total", "emissions",
            "efficiency", "per_capita", "per_hce"]
    if report.floor_area_included:
        cols.append("per_floor_area")
    cols += ["cum_Dc_intensity", "cum_DC_total", "cum_per_capita", "cum_per_hce"]
    if report.floor_area_included:
        cols.append("cum_per_floor_area")
    cols += ["share_DC_pct", "share_Dc_pct"]
    out = Table(cols)
    fa = report.floor_area_included
    for r in report.years:
        row = ["year", r.year - 1, r.year, r.Dc_intensity, r.DC_total, r.emissions,
               r.efficiency, r.per_capita, r.per_hce]
        if fa:
            row.append(r.per_floor_area)
        row += [r.cum_Dc_intensity, r.cum_DC_total, r.cum_per_capita, r.cum_per_hce]
        if fa:
            row.append(r.cum_per_floor_area)
        row += [None, None]
        out.rows.append(row)
    for scope, st in [("stage", s) for s in report.stages] + [("horizon", report.horizon)]:
        row = [scope, st.stage[0], st.stage[1], st.Dc_intensity, st.DC_total, st.emissions,
               st.efficiency, st.per_capita, st.per_hce]
        if fa:
            row.append(st.per_floor_area)
        row += [None] * (5 if fa else 4)
        row += [st.share_DC, st.share_Dc]
        out.rows.append(row)
    return out


def fig6_chart(report: DecarbReport, title: str) -> ChartSpec:
    cats = [str(r.year) for r in report.years]
    return ChartSpec("bar", title, cats, [("total decarbonization (MtCO2)",
                                             [r.DC_total for r in report.years])], "MtCO2")


def fig7_chart(report: DecarbReport, title: str) -> ChartSpec:
    cats = [str(r.year) for r in report.years]
    series = [
        ("per household (kgCO2)", [r.Dc_intensity for r in report.years]),
        ("per capita (kgCO2)", [r.per_capita for r in report.years]),
        ("per thousand USD HCE (kgCO2)", [r.per_hce for r in report.years]),
    ]
    if report.floor_area_included:
        series.append(("per m2 floor (kgCO2)", [r.per_floor_area for r in report.years]))
    return ChartSpec("line", title, cats, series, "kgCO2")


def scenario_table(params: ScenarioParams, result: ScenarioResult) -> Table:
    out = Table(["key", "value", "kind"])
    for k, v in vars(params).items():
        if v is not None:
            out.rows.append([k, float(v) if isinstance(v, float) else v, "parameter"])
    for k, v in result.intermediates.items():
        out.rows.append([k, v, "intermediate"])
    out.rows.append(["assumption_sensitive", int(result.assumption_sensitive), "flag"])
    return out
