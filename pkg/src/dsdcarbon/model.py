"""Domain types and the carbon-intensity factor identity.

Units (inputs): population and households in millions, GDP and household
consumption expenditure (HCE) in million USD, energy in Mtce, emissions in
MtCO2, floor area in million m2.

Derived factors for one year::

    c   = 1000 * sum(C_i) / H        kgCO2 per household
    p   = P / H                      persons per household
    g   = GDP / P                    USD per person
    s   = HCE / GDP                  expenditure index
    e_i = 1000 * E_i / HCE           kgce per USD
    e   = sum(e_i)
    k_i = C_i / E_i                  kgCO2 per kgce (0 for inactive end uses)
    w_i = e_i / e                    end-use energy share

so that ``c = sum_i e * k_i * w_i * p * g * s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    GapInYears,
    InvariantViolation,
    UndefinedEmissionFactor,
    ZeroEnergy,
)

CANONICAL_END_USES: tuple[tuple[str, str], ...] = (
    ("space_cooling", "Space cooling"),
    ("space_heating", "Space heating"),
    ("water_heating", "Water heating"),
    ("cooking", "Cooking"),
    ("lighting", "Lighting"),
    ("appliances_others", "Appliances and others"),
)

# Mt -> kg is 1e9, million households -> households is 1e6
KG_PER_MT_PER_MILLION = 1000.0


@dataclass(frozen=True)
class EndUse:
    id: str
    label: str = ""

    def __post_init__(self):
        if not self.id:
            raise InvariantViolation("end-use id must be non-empty", field="end_uses")
        if not self.label:
            object.__setattr__(self, "label", self.id.replace("_", " ").capitalize())


def canonical_end_uses(exclude: Sequence[str] = ()) -> tuple[EndUse, ...]:
    return tuple(EndUse(i, label) for i, label in CANONICAL_END_USES if i not in exclude)


@dataclass(frozen=True)
class AnnualObservation:
    """Raw per-year country record.

    ``energy`` and ``emissions`` map end-use id to Mtce and MtCO2.
    ``floor_area`` is optional (million m2).
    """

    year: int
    P: float
    H: float
    GDP: float
    HCE: float
    energy: Mapping[str, float]
    emissions: Mapping[str, float]
    floor_area: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "energy", dict(self.energy))
        object.__setattr__(self, "emissions", dict(self.emissions))
        self.validate()

    def validate(self) -> None:
        for name in ("P", "H", "GDP", "HCE"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvariantViolation(
                    f"{name} must be strictly positive in {self.year}, got {v}",
                    year=self.year, field=name,
                )
        if self.HCE > self.GDP:
            raise InvariantViolation(
                f"HCE exceeds GDP in {self.year} (expenditure index > 1)",
                year=self.year, field="HCE",
            )
        if set(self.energy) != set(self.emissions):
            raise InvariantViolation(
                f"energy and emission end uses differ in {self.year}", year=self.year
            )
        for u in self.energy:
            E, C = self.energy[u], self.emissions[u]
            if not (math.isfinite(E) and E >= 0):
                raise InvariantViolation(
                    f"E_{u} must be >= 0 in {self.year}", year=self.year, field=f"E_{u}"
                )
            if not (math.isfinite(C) and C >= 0):
                raise InvariantViolation(
                    f"C_{u} must be >= 0 in {self.year}", year=self.year, field=f"C_{u}"
                )
            if E == 0 and C > 0:
                raise InvariantViolation(
                    f"end use {u} has emissions without energy in {self.year}",
                    year=self.year, field=f"C_{u}",
                )
        if self.floor_area is not None and not (self.floor_area > 0):
            raise InvariantViolation(
                f"floor area must be positive in {self.year}", year=self.year, field="FA"
            )

    @property
    def total_energy(self) -> float:
        return math.fsum(self.energy.values())

    @property
    def total_emissions(self) -> float:
        return math.fsum(self.emissions.values())


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FactorState:
    """Identity factors for one year; per-end-use arrays follow ``end_uses``."""

    end_uses: tuple[str, ...]
    c: float
    c_i: np.ndarray
    p: float
    g: float
    s: float
    e: float
    e_i: np.ndarray
    k: np.ndarray
    w: np.ndarray
    year: int | None = None

    def __post_init__(self):
        for name in ("c_i", "e_i", "k", "w"):
            arr = _frozen(getattr(self, name))
            if arr.shape != (len(self.end_uses),):
                raise InvariantViolation(f"{name} has wrong length", field=name)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_factors(
        cls,
        e: float,
        p: float,
        g: float,
        s: float,
        k: Sequence[float],
        w: Sequence[float],
        end_uses: Sequence[str] | None = None,
        year: int | None = None,
    ) -> "FactorState":
        """Build a state directly from factor values (c follows the identity)."""
        k = np.asarray(k, dtype=float)
        w = np.asarray(w, dtype=float)
        if end_uses is None:
            end_uses = tuple(f"u{i + 1}" for i in range(len(k)))
        c_i = e * k * w * p * g * s
        return cls(
            end_uses=tuple(end_uses), c=math.fsum(c_i), c_i=c_i, p=p, g=g, s=s,
            e=e, e_i=e * w, k=k, w=w, year=year,
        )

    @property
    def m(self) -> int:
        return len(self.end_uses)

    def identity_c(self) -> float:
        """c recomputed from the factors."""
        return math.fsum(self.e * self.k * self.w * self.p * self.g * self.s)

    def same_values(self, other: "FactorState") -> bool:
        return (
            self.end_uses == other.end_uses
            and (self.c, self.p, self.g, self.s, self.e)
            == (other.c, other.p, other.g, other.s, other.e)
            and all(np.array_equal(getattr(self, n), getattr(other, n))
                    for n in ("c_i", "e_i", "k", "w"))
        )


def derive_factors(obs: AnnualObservation, end_uses: Sequence[str] | None = None) -> FactorState:
    """Convert one observation into its identity factors."""
    uses = tuple(end_uses) if end_uses is not None else tuple(obs.energy)
    E = np.array([obs.energy[u] for u in uses], dtype=float)
    C = np.array([obs.emissions[u] for u in uses], dtype=float)
    E_total = math.fsum(E)
    if E_total <= 0:
        raise ZeroEnergy(f"total energy is zero in {obs.year}")
    k = np.zeros_like(E)
    for i, u in enumerate(uses):
        if E[i] > 0:
            k[i] = C[i] / E[i]
        elif C[i] > 0:
            raise UndefinedEmissionFactor(
                f"end use {u} has emissions but no energy in {obs.year}"
            )
    e_i = KG_PER_MT_PER_MILLION * E / obs.HCE
    w = E / E_total
    return FactorState(
        end_uses=uses,
        c=KG_PER_MT_PER_MILLION * math.fsum(C) / obs.H,
        c_i=KG_PER_MT_PER_MILLION * C / obs.H,
        p=obs.P / obs.H,
        g=obs.GDP / obs.P,
        s=obs.HCE / obs.GDP,
        e=math.fsum(e_i),
        e_i=e_i,
        k=k,
        w=w,
        year=obs.year,
    )


@dataclass(frozen=True)
class CountrySeries:
    country: str
    end_uses: tuple[EndUse, ...]
    observations: tuple[AnnualObservation, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "end_uses", tuple(self.end_uses))
        object.__setattr__(self, "observations", tuple(self.observations))
        ids = [u.id for u in self.end_uses]
        if not ids:
            raise InvariantViolation("series declares no end uses", field="end_uses")
        if len(set(ids)) != len(ids):
            raise InvariantViolation("duplicate end-use ids", field="end_uses")
        prev = None
        for obs in self.observations:
            if set(obs.energy) != set(ids):
                raise InvariantViolation(
                    f"observation {obs.year} does not carry the declared end uses",
                    year=obs.year,
                )
            if prev is not None:
                if obs.year <= prev:
                    raise InvariantViolation(
                        f"years not strictly increasing at {obs.year}", year=obs.year,
                        field="year",
                    )
                if obs.year != prev + 1:
                    raise GapInYears(prev + 1)
            prev = obs.year

    @property
    def end_use_ids(self) -> tuple[str, ...]:
        return tuple(u.id for u in self.end_uses)

    @property
    def years(self) -> list[int]:
        return [o.year for o in self.observations]

    def observation(self, year: int) -> AnnualObservation:
        for o in self.observations:
            if o.year == year:
                return o
        raise KeyError(year)

    def window(self, start: int, end: int) -> "CountrySeries":
        obs = [o for o in self.observations if start <= o.year <= end]
        return CountrySeries(self.country, self.end_uses, obs)


def intensity_series(series: CountrySeries) -> dict[int, FactorState]:
    """Derive a FactorState for every year, keyed by year in series order."""
    out: dict[int, FactorState] = {}
    for obs in series.observations:
        try:
            out[obs.year] = derive_factors(obs, series.end_use_ids)
        except (ZeroEnergy, UndefinedEmissionFactor) as exc:
            raise type(exc)(f"year {obs.year}: {exc}") from exc
    return out
