"""Avoided emissions from electrification improvements.

Household energy grows geometrically from the base year, and the emission
factor of the household energy mix is the electrification-weighted blend of
the electricity factor and a fixed primary-energy factor::

    E_hh(T)  = E_hh(base) * (1 + growth) ** (T - base)
    K(r, ke) = r * ke + (1 - r) * k_primary
    avoided  = H_target * E_hh(T) * (K(r_base, ke_base) - K(r_target, ke_target))

The combining formula is an assumption: results are sensitive to
``k_primary`` and the base-year electricity factor.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping

from .errors import InvalidRates, MissingBaseYear
from .model import CountrySeries

log = logging.getLogger(__name__)

# 0.46 kgCO2/kWh corresponds to 3.7 kgCO2/kgce, so 1 kgce ~ 8.04 kWh
KWH_PER_KGCE = 3.7 / 0.46
KWH_CONSISTENCY_TOL = 0.05


@dataclass(frozen=True)
class ScenarioParams:
    base_year: int
    horizon_year: int
    H_target: float
    energy_per_household_growth: float
    elec_rate_base: float
    elec_rate_target: float
    k_elec_base: float
    k_elec_target: float
    k_primary: float
    thermal_share_base: float | None = None
    thermal_share_target: float | None = None
    e_hh_base: float | None = None  # kgce per household; derived from a series if None

    def validate(self) -> None:
        for name in ("elec_rate_base", "elec_rate_target",
                     "thermal_share_base", "thermal_share_target"):
            v = getattr(self, name)
            if v is not None and not (0.0 <= v <= 1.0):
                raise InvalidRates(f"{name} must lie in [0, 1], got {v}")
        for name in ("k_elec_base", "k_elec_target", "k_primary"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise InvalidRates(f"{name} must be >= 0, got {v}")
        if self.horizon_year < self.base_year:
            raise InvalidRates("horizon year precedes base year")
        if not self.H_target > 0:
            raise InvalidRates(f"H_target must be positive, got {self.H_target}")
        if self.energy_per_household_growth <= -1:
            raise InvalidRates("growth rate must exceed -100%")
        if self.e_hh_base is not None and not self.e_hh_base >= 0:
            raise InvalidRates("e_hh_base must be >= 0")


@dataclass
class ScenarioResult:
    avoided_mt: float
    intermediates: dict[str, float]
    assumption_sensitive: bool = True


def mix_factor(rate: float, k_elec: float, k_primary: float) -> float:
    return rate * k_elec + (1.0 - rate) * k_primary


def base_energy_per_household(series: CountrySeries, year: int) -> float:
    """kgce per household in ``year``: 1000 * E[Mtce] / H[million]."""
    try:
        obs = series.observation(year)
    except KeyError:
        raise MissingBaseYear(f"base year {year} not in series") from None
    return 1000.0 * obs.total_energy / obs.H


def project_avoided(params: ScenarioParams, series: CountrySeries | None = None) -> ScenarioResult:
    params.validate()
    if params.e_hh_base is not None:
        e_base = params.e_hh_base
    elif series is not None:
        e_base = base_energy_per_household(series, params.base_year)
    else:
        raise MissingBaseYear("no e_hh_base given and no series to derive it from")

    years = params.horizon_year - params.base_year
    e_horizon = e_base * (1.0 + params.energy_per_household_growth) ** years
    K_base = mix_factor(params.elec_rate_base, params.k_elec_base, params.k_primary)
    K_target = mix_factor(params.elec_rate_target, params.k_elec_target, params.k_primary)
    # million households * kgce/household * kgCO2/kgce = 1e6 kg -> /1000 gives Mt
    emissions_base_mix = params.H_target * e_horizon * K_base / 1000.0
    emissions_target_mix = params.H_target * e_horizon * K_target / 1000.0
    avoided = emissions_base_mix - emissions_target_mix
    inter = {
        "years": float(years),
        "e_hh_base_kgce": e_base,
        "e_hh_horizon_kgce": e_horizon,
        "growth_factor": (1.0 + params.energy_per_household_growth) ** years,
        "H_target_million": params.H_target,
        "K_mix_base": K_base,
        "K_mix_target": K_target,
        "K_mix_drop": K_base - K_target,
        "emissions_base_mix_mt": emissions_base_mix,
        "emissions_target_mix_mt": emissions_target_mix,
        "avoided_mt": avoided,
    }
    for key, val in inter.items():
        log.info("scenario %s = %.6g", key, val)
    return ScenarioResult(avoided, inter)


_FLOAT_FIELDS = {f.name for f in fields(ScenarioParams)} - {"base_year", "horizon_year"}


def params_from_mapping(values: Mapping[str, str]) -> ScenarioParams:
    """Build parameters from string key-values.

    ``k_elec_base_kwh`` / ``k_elec_target_kwh`` (kgCO2/kWh) may accompany the
    kgce-based factors; when both are given they must agree within 5 %.
    """
    vals = dict(values)
    kwh = {k: float(vals.pop(k)) for k in ("k_elec_base_kwh", "k_elec_target_kwh") if k in vals}
    unknown = set(vals) - _FLOAT_FIELDS - {"base_year", "horizon_year"}
    if unknown:
        raise InvalidRates(f"unknown scenario keys: {', '.join(sorted(unknown))}")
    kwargs: dict[str, object] = {}
    for key, raw in vals.items():
        kwargs[key] = int(raw) if key in ("base_year", "horizon_year") else float(raw)
    for key, per_kwh in kwh.items():
        target = key[: -len("_kwh")]
        if target not in kwargs:
            raise InvalidRates(f"{key} given without {target} (kgCO2/kgce)")
        expected = per_kwh * KWH_PER_KGCE
        if abs(kwargs[target] - expected) > KWH_CONSISTENCY_TOL * expected:
            raise InvalidRates(
                f"{target}={kwargs[target]} kgCO2/kgce inconsistent with "
                f"{per_kwh} kgCO2/kWh (expected about {expected:.3f})"
            )
    missing = {
        f.name for f in fields(ScenarioParams)
        if f.default is not None and f.name not in kwargs
    }
    if missing:
        raise InvalidRates(f"missing scenario keys: {', '.join(sorted(missing))}")
    params = ScenarioParams(**kwargs)
    params.validate()
    return params


def load_params(path: str | Path, overrides: Mapping[str, str] | None = None) -> ScenarioParams:
    from .ingest import read_key_values

    values = read_key_values(Path(path))
    if overrides:
        values.update(overrides)
    return params_from_mapping(values)
