"""Decarbonization scales derived from decomposition tables.

Decarbonization intensity is the magnitude of the negative driver
contributions (at the six-driver level e, p, g, s, k, w). Total
decarbonization multiplies it by the household stock, and efficiency divides
that by emissions over the same window. The per-capita, per-floor-area and
per-expenditure scales divide total decarbonization by P, floor area and HCE.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

from .dsd import ContributionTable
from .errors import MissingFloorArea, ZeroEmissions
from .model import CountrySeries

log = logging.getLogger(__name__)


def decarb_intensity(table: ContributionTable) -> float:
    """kgCO2 per household removed by the drivers that pushed c down."""
    negatives = [v for v in table.aggregates().values() if v < 0]
    return -math.fsum(negatives) + 0.0


def total_decarb(Dc: float, H: float) -> float:
    """MtCO2 from kgCO2/household and million households."""
    if Dc < 0:
        raise ValueError(f"decarbonization intensity must be >= 0, got {Dc}")
    if not H > 0:
        raise ValueError(f"household count must be positive, got {H}")
    return Dc * H / 1000.0


def decarb_efficiency(DC: float, C_total: float) -> float:
    if not C_total > 0:
        raise ZeroEmissions(f"emissions over the window must be positive, got {C_total}")
    eff = DC / C_total
    if eff > 1.0:
        log.warning("decarbonization efficiency %.4f exceeds 1", eff)
    return eff


@dataclass
class YearMetrics:
    year: int
    Dc_intensity: float
    DC_total: float
    emissions: float
    efficiency: float
    per_capita: float
    per_hce: float
    per_floor_area: float | None = None
    cum_Dc_intensity: float = 0.0
    cum_DC_total: float = 0.0
    cum_per_capita: float = 0.0
    cum_per_hce: float = 0.0
    cum_per_floor_area: float | None = None


@dataclass
class StageMetrics:
    stage: tuple[int, int]
    Dc_intensity: float
    DC_total: float
    emissions: float
    efficiency: float
    share_DC: float
    share_Dc: float
    per_capita: float
    per_hce: float
    per_floor_area: float | None = None


@dataclass
class DecarbReport:
    country: str
    years: list[YearMetrics]
    stages: list[StageMetrics]
    horizon: StageMetrics
    floor_area_included: bool
    warnings: list[str] = field(default_factory=list)


def _stage(rows: Sequence[YearMetrics], stage, total_DC, total_Dc, with_fa) -> StageMetrics:
    DC = math.fsum(r.DC_total for r in rows)
    Dc = math.fsum(r.Dc_intensity for r in rows)
    C = math.fsum(r.emissions for r in rows)
    return StageMetrics(
        stage=stage,
        Dc_intensity=Dc,
        DC_total=DC,
        emissions=C,
        efficiency=decarb_efficiency(DC, C),
        share_DC=100.0 * DC / total_DC if total_DC > 0 else 0.0,
        share_Dc=100.0 * Dc / total_Dc if total_Dc > 0 else 0.0,
        per_capita=math.fsum(r.per_capita for r in rows),
        per_hce=math.fsum(r.per_hce for r in rows),
        per_floor_area=math.fsum(r.per_floor_area for r in rows) if with_fa else None,
    )


def scale_report(
    tables: Sequence[ContributionTable],
    series: CountrySeries,
    stages: Sequence[tuple[int, int]] = (),
    floor_area: bool | None = None,
) -> DecarbReport:
    """All six scales per year (window ending that year), per stage and over the horizon.

    Yearly windows use the end-year household stock, population, HCE, floor
    area and emissions. ``floor_area=True`` demands the per-floor scale and
    raises if any year lacks it; ``None`` includes it when available.
    """
    if not tables:
        raise ValueError("no tables supplied")
    warnings: list[str] = []
    has_fa = all(o.floor_area is not None for o in series.observations)
    if floor_area and not has_fa:
        raise MissingFloorArea("floor area requested but missing in some years")
    with_fa = has_fa if floor_area is None else bool(floor_area)
    if floor_area is None and not has_fa:
        msg = "floor area missing; per-floor-area scale omitted"
        log.warning(msg)
        warnings.append(msg)

    rows: list[YearMetrics] = []
    cum = {"Dc": 0.0, "DC": 0.0, "pc": 0.0, "hce": 0.0, "fa": 0.0}
    for t in tables:
        year = t.period[1]
        try:
            obs = series.observation(year)
        except KeyError:
            raise ValueError(f"table period {t.period} not aligned with series years") from None
        Dc = decarb_intensity(t)
        DC = total_decarb(Dc, obs.H)
        C = obs.total_emissions
        kg = DC * 1e9
        row = YearMetrics(
            year=year,
            Dc_intensity=Dc,
            DC_total=DC,
            emissions=C,
            efficiency=decarb_efficiency(DC, C),
            per_capita=kg / (obs.P * 1e6),
            per_hce=kg / (obs.HCE * 1e6 / 1000.0),
            per_floor_area=kg / (obs.floor_area * 1e6) if with_fa else None,
        )
        cum["Dc"] += row.Dc_intensity
        cum["DC"] += row.DC_total
        cum["pc"] += row.per_capita
        cum["hce"] += row.per_hce
        row.cum_Dc_intensity = cum["Dc"]
        row.cum_DC_total = cum["DC"]
        row.cum_per_capita = cum["pc"]
        row.cum_per_hce = cum["hce"]
        if with_fa:
            cum["fa"] += row.per_floor_area
            row.cum_per_floor_area = cum["fa"]
        rows.append(row)

    total_DC = math.fsum(r.DC_total for r in rows)
    total_Dc = math.fsum(r.Dc_intensity for r in rows)
    stage_rows = []
    for a, b in stages:
        sel = [r for r in rows if a < r.year <= b]
        if not sel:
            raise ValueError(f"stage {a}-{b} covers no yearly window")
        stage_rows.append(_stage(sel, (a, b), total_DC, total_Dc, with_fa))
    horizon = _stage(rows, (tables[0].period[0], rows[-1].year), total_DC, total_Dc, with_fa)
    return DecarbReport(series.country, rows, stage_rows, horizon, with_fa, warnings)
