"""CSV ingestion, manifests and the synthetic fixture.

CSV layout: one row per year with columns ``year,P,H,GDP,HCE`` and an
optional ``FA`` (floor area), followed by ``E_<end use>`` and ``C_<end use>``
for each declared end use. Lines starting with ``#`` are comments; a
missing floor area is an empty field.

The manifest is key-value text (``key = value``), either a sidecar file or
``#@ key = value`` pragma lines at the top of the CSV::

    country = CHN
    end_uses = space_cooling, water_heating, cooking
    years = 2000-2020
    unit.P = million persons
    unit.E = Mtce
    column.P = population          # optional header rename
    label.cooking = Cooking        # optional display label
"""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvariantViolation, ParseError, SchemaError
from .model import (
    CANONICAL_END_USES,
    AnnualObservation,
    CountrySeries,
    EndUse,
)

BASE_COLUMNS = ("year", "P", "H", "GDP", "HCE")

CANONICAL_UNITS = {
    "P": "million persons",
    "H": "million households",
    "GDP": "million USD",
    "HCE": "million USD",
    "FA": "million m2",
    "E": "Mtce",
    "C": "MtCO2",
}


def _norm_unit(text: str) -> str:
    t = text.strip().replace("₂", "2").replace("²", "2").replace("^2", "2")
    return " ".join(t.lower().split())


def read_key_values(path: Path) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        return parse_key_values(fh.read(), str(path))


def parse_key_values(text: str, source: str = "<text>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise SchemaError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if key in out:
            raise SchemaError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


@dataclass
class DatasetManifest:
    country: str
    end_uses: tuple[EndUse, ...]
    years: tuple[int, int] | None = None
    columns: dict[str, str] = field(default_factory=dict)
    units: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for key, unit in self.units.items():
            if key not in CANONICAL_UNITS:
                raise SchemaError(f"unit declared for unknown quantity {key!r}")
            if _norm_unit(unit) != _norm_unit(CANONICAL_UNITS[key]):
                raise SchemaError(
                    f"unit {unit!r} for {key} not supported; expected {CANONICAL_UNITS[key]!r}"
                )

    def header_for(self, canonical: str) -> str:
        return self.columns.get(canonical, canonical)

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> "DatasetManifest":
        if "end_uses" not in values:
            raise SchemaError("manifest lacks 'end_uses'")
        labels = dict(CANONICAL_END_USES)
        for k, v in values.items():
            if k.startswith("label."):
                labels[k[len("label."):]] = v
        ids = [u.strip() for u in values["end_uses"].split(",") if u.strip()]
        if not ids:
            raise SchemaError("manifest declares no end uses")
        if len(set(ids)) != len(ids):
            raise SchemaError("manifest declares duplicate end uses")
        years = None
        if "years" in values:
            a, sep, b = values["years"].partition("-")
            try:
                years = (int(a), int(b))
            except ValueError:
                raise SchemaError(f"bad years range {values['years']!r}") from None
        known = {"country", "end_uses", "years"}
        for k in values:
            if k not in known and not k.startswith(("unit.", "column.", "label.")):
                raise SchemaError(f"unknown manifest key {k!r}")
        return cls(
            country=values.get("country", "unknown"),
            end_uses=tuple(EndUse(i, labels.get(i, "")) for i in ids),
            years=years,
            columns={k[len("column."):]: v for k, v in values.items() if k.startswith("column.")},
            units={k[len("unit."):]: v for k, v in values.items() if k.startswith("unit.")},
        )

    def to_text(self) -> str:
        lines = [f"country = {self.country}",
                 "end_uses = " + ", ".join(u.id for u in self.end_uses)]
        if self.years:
            lines.append(f"years = {self.years[0]}-{self.years[1]}")
        for k, v in self.units.items():
            lines.append(f"unit.{k} = {v}")
        for k, v in self.columns.items():
            lines.append(f"column.{k} = {v}")
        for u in self.end_uses:
            lines.append(f"label.{u.id} = {u.label}")
        return "\n".join(lines) + "\n"


def load_manifest(path: str | Path) -> DatasetManifest:
    return DatasetManifest.from_mapping(read_key_values(Path(path)))


def _pragmas(text: str) -> dict[str, str]:
    lines = []
    for raw in text.splitlines():
        if raw.startswith("#@"):
            lines.append(raw[2:])
        elif raw.strip():
            break
    return parse_key_values("\n".join(lines), "pragma")


def _number(raw: str, row: int, column: str) -> float:
    try:
        v = float(raw)
    except ValueError:
        raise ParseError(f"row {row}, column {column}: not a number: {raw!r}", row, column) from None
    if not math.isfinite(v):
        raise ParseError(f"row {row}, column {column}: non-finite value {raw!r}", row, column)
    return v


def parse_csv(text: str, manifest: DatasetManifest | None = None) -> CountrySeries:
    if manifest is None:
        pragmas = _pragmas(text)
        if not pragmas:
            raise SchemaError("no manifest given and no '#@' pragma lines in the file")
        manifest = DatasetManifest.from_mapping(pragmas)

    lines = [(i, ln) for i, ln in enumerate(text.splitlines(), 1)
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError("file has no header row", 1, None)
    header_line, header = lines[0][0], next(csv.reader([lines[0][1]]))
    header = [h.strip() for h in header]
    col_index = {h: j for j, h in enumerate(header)}
    if len(col_index) != len(header):
        raise SchemaError(f"duplicate column names in header (line {header_line})")

    ids = [u.id for u in manifest.end_uses]
    required = list(BASE_COLUMNS) + [f"E_{u}" for u in ids] + [f"C_{u}" for u in ids]
    wanted = {c: manifest.header_for(c) for c in required + ["FA"]}
    missing = [wanted[c] for c in required if wanted[c] not in col_index]
    if missing:
        raise SchemaError(f"missing columns: {', '.join(missing)}")
    extra = set(header) - set(wanted.values())
    if extra:
        raise SchemaError(f"unexpected columns: {', '.join(sorted(extra))}")

    observations = []
    for lineno, ln in lines[1:]:
        cells = next(csv.reader([ln]))
        if len(cells) != len(header):
            raise ParseError(
                f"row {lineno}: expected {len(header)} fields, got {len(cells)}", lineno, None
            )

        def cell(canonical: str) -> str:
            return cells[col_index[wanted[canonical]]].strip()

        raw_year = cell("year")
        try:
            year = int(raw_year)
        except ValueError:
            raise ParseError(f"row {lineno}, column year: not an integer: {raw_year!r}",
                             lineno, wanted["year"]) from None
        vals = {c: _number(cell(c), lineno, wanted[c]) for c in required[1:]}
        fa = None
        if wanted["FA"] in col_index and cell("FA") != "":
            fa = _number(cell("FA"), lineno, wanted["FA"])
        try:
            observations.append(AnnualObservation(
                year=year, P=vals["P"], H=vals["H"], GDP=vals["GDP"], HCE=vals["HCE"],
                energy={u: vals[f"E_{u}"] for u in ids},
                emissions={u: vals[f"C_{u}"] for u in ids},
                floor_area=fa,
            ))
        except InvariantViolation as exc:
            raise InvariantViolation(f"row {lineno}: {exc}", exc.year, exc.field) from None

    series = CountrySeries(manifest.country, manifest.end_uses, observations)
    if manifest.years and series.observations:
        got = (series.years[0], series.years[-1])
        if got != manifest.years:
            raise SchemaError(f"file covers {got[0]}-{got[1]}, manifest declares "
                              f"{manifest.years[0]}-{manifest.years[1]}")
    return series


def load_csv(path: str | Path, manifest: DatasetManifest | str | Path | None = None) -> CountrySeries:
    """Read and validate a country series."""
    if manifest is not None and not isinstance(manifest, DatasetManifest):
        manifest = load_manifest(manifest)
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_csv(fh.read(), manifest)


def manifest_for(series: CountrySeries, with_units: bool = True) -> DatasetManifest:
    years = (series.years[0], series.years[-1]) if series.observations else None
    units = dict(CANONICAL_UNITS) if with_units else {}
    return DatasetManifest(series.country, series.end_uses, years, {}, units)


def _fmt(v: float) -> str:
    return format(v, ".17g")


def series_to_csv(series: CountrySeries) -> str:
    ids = series.end_use_ids
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(BASE_COLUMNS) + ["FA"] + [f"E_{u}" for u in ids] + [f"C_{u}" for u in ids])
    for o in series.observations:
        writer.writerow(
            [str(o.year), _fmt(o.P), _fmt(o.H), _fmt(o.GDP), _fmt(o.HCE),
             "" if o.floor_area is None else _fmt(o.floor_area)]
            + [_fmt(o.energy[u]) for u in ids]
            + [_fmt(o.emissions[u]) for u in ids]
        )
    return buf.getvalue()


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_csv(series: CountrySeries, path: str | Path, manifest_path: str | Path | None = None) -> None:
    atomic_write_text(path, series_to_csv(series))
    if manifest_path is not None:
        atomic_write_text(manifest_path, manifest_for(series).to_text())


# Fixture trajectories: level in the first year and log growth per year.
_FIXTURE_END_USES = {
    # id: (share, emission factor kgCO2/kgce, k growth, share drift)
    "space_cooling": (0.04, 4.6, -0.012, 0.015),
    "space_heating": (0.30, 2.6, -0.008, -0.004),
    "water_heating": (0.16, 2.3, -0.006, 0.006),
    "cooking": (0.30, 2.1, -0.005, -0.005),
    "lighting": (0.05, 4.7, -0.014, -0.015),
    "appliances_others": (0.15, 4.6, -0.012, 0.003),
}


def generate_fixture(seed: int = 1, years: int = 21, m: int = 6, start_year: int = 2000,
                     country: str = "FIX") -> CountrySeries:
    """Deterministic smooth synthetic series with China-like magnitudes.

    All identity factors follow log-linear paths (shares via log-linear
    logits): GDP per capita rises, energy intensity and emission factors
    fall. ``m < 6`` drops space heating first, then trailing end uses.
    The seed perturbs growth rates by up to 10 % and levels by up to 3 %.
    GDP and HCE are in constant-price million USD.
    """
    if years < 2:
        raise ValueError("fixture needs at least 2 years")
    if not 1 <= m <= 6:
        raise ValueError("fixture supports 1..6 end uses")
    order = [u for u, _ in CANONICAL_END_USES]
    if m < 6:
        order = [u for u in order if u != "space_heating"][:m]
    rng = np.random.default_rng(seed)

    def jitter(scale: float, size=None):
        return 1.0 + scale * rng.uniform(-1.0, 1.0, size)

    t = np.arange(years, dtype=float)
    P = 1263.0 * jitter(0.03) * np.exp(0.0055 * jitter(0.1) * t)
    p = 3.6 * jitter(0.03) * np.exp(-0.006 * jitter(0.1) * t)
    g = 950.0 * jitter(0.03) * np.exp(0.05 * jitter(0.1) * t)
    s = 0.46 * jitter(0.03) * np.exp(-0.004 * jitter(0.1) * t)
    e = 0.25 * jitter(0.03) * np.exp(-0.010 * jitter(0.1) * t)
    fa = 13000.0 * jitter(0.03) * np.exp(0.03 * jitter(0.1) * t)

    spec = np.array([_FIXTURE_END_USES[u] for u in order])
    share0 = spec[:, 0] * jitter(0.03, m)
    k0 = spec[:, 1] * jitter(0.03, m)
    k_rate = spec[:, 2] * jitter(0.1, m)
    drift = spec[:, 3] * jitter(0.1, m)
    logits = np.log(share0)[None, :] + drift[None, :] * t[:, None]
    w = np.exp(logits)
    w /= w.sum(axis=1, keepdims=True)
    k = k0[None, :] * np.exp(k_rate[None, :] * t[:, None])

    H = P / p
    GDP = g * P
    HCE = s * GDP
    E = e * HCE / 1000.0
    observations = []
    for j in range(years):
        Ei = w[j] * E[j]
        Ci = k[j] * Ei
        observations.append(AnnualObservation(
            year=start_year + j,
            P=float(P[j]), H=float(H[j]), GDP=float(GDP[j]), HCE=float(HCE[j]),
            energy={u: float(Ei[i]) for i, u in enumerate(order)},
            emissions={u: float(Ci[i]) for i, u in enumerate(order)},
            floor_area=float(fa[j]),
        ))
    labels = dict(CANONICAL_END_USES)
    return CountrySeries(country, tuple(EndUse(u, labels[u]) for u in order), observations)
