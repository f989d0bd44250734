import logging
import math

import pytest

from conftest import STAGES
from dsdcarbon.dsd import ContributionTable, contribution_rate
from dsdcarbon.errors import MissingFloorArea, ZeroEmissions
from dsdcarbon.ingest import generate_fixture
from dsdcarbon.metrics import decarb_efficiency, decarb_intensity, scale_report, total_decarb
from dsdcarbon.model import CountrySeries


def table(**drivers):
    by = {d: drivers.get(d, 0.0) for d in ("e", "p", "g", "s")}
    by["k:a"] = drivers.get("k", 0.0)
    by["w:a"] = drivers.get("w", 0.0)
    dc = math.fsum(by.values())
    return ContributionTable((2000, 2001), ("a",), dc, by, 0.0, 1)


def test_intensity_sums_negative_drivers():
    assert decarb_intensity(table(e=-100.0, k=-64.8, g=300.0, w=-0.0)) == pytest.approx(164.8)
    assert decarb_intensity(table(g=10.0)) == 0.0


def test_total_and_per_capita():
    DC = total_decarb(164.8, 300.0)
    assert DC == pytest.approx(49.44)
    # kg over persons: 49.44 Mt over 1200 million persons
    assert DC * 1e9 / (1200.0 * 1e6) == pytest.approx(41.2)


def test_efficiency_and_errors(caplog):
    assert decarb_efficiency(1498.3, 13028.7) == pytest.approx(0.1150, abs=5e-4)
    assert decarb_efficiency(399.7, 5329.3) == pytest.approx(0.0750, abs=5e-4)
    with pytest.raises(ZeroEmissions):
        decarb_efficiency(1.0, 0.0)
    with caplog.at_level(logging.WARNING):
        assert decarb_efficiency(2.0, 1.0) == 2.0
    assert "exceeds 1" in caplog.text
    with pytest.raises(ValueError):
        total_decarb(-1.0, 10.0)


def test_rates():
    assert contribution_rate(-447.9, 1125.4) == pytest.approx(-39.799, abs=1e-3)
    assert contribution_rate(-130.2, 744.0) == pytest.approx(-17.5, abs=1e-3)


def test_report_on_fixture(fixture_series, fixture_chain):
    rep = scale_report(fixture_chain.yearly, fixture_series, STAGES)
    assert rep.floor_area_included and not rep.warnings
    assert len(rep.years) == 20
    assert sum(s.share_DC for s in rep.stages) == pytest.approx(100.0, abs=1e-9)
    assert sum(s.share_Dc for s in rep.stages) == pytest.approx(100.0, abs=1e-9)
    cum = [r.cum_DC_total for r in rep.years]
    assert all(b >= a for a, b in zip(cum, cum[1:]))
    assert rep.horizon.DC_total == pytest.approx(cum[-1])
    for r in rep.years:
        assert 0 <= r.efficiency < 1
        assert r.per_floor_area is not None


def test_intensity_identity(fixture_chain):
    for t in fixture_chain.yearly:
        positives = math.fsum(v for v in t.aggregates().values() if v > 0)
        # positives - Dc equals the sum of contributions, i.e. delta c minus residual
        assert positives - decarb_intensity(t) == pytest.approx(t.delta_c - t.residual, abs=1e-9)


def _without_floor_area(series):
    from dataclasses import replace

    return CountrySeries(series.country, series.end_uses,
                         [replace(o, floor_area=None) for o in series.observations])


def test_missing_floor_area(fixture_chain):
    series = _without_floor_area(generate_fixture(seed=1))
    rep = scale_report(fixture_chain.yearly, series, STAGES)
    assert not rep.floor_area_included
    assert rep.warnings and all(r.per_floor_area is None for r in rep.years)
    with pytest.raises(MissingFloorArea):
        scale_report(fixture_chain.yearly, series, STAGES, floor_area=True)


def test_report_errors(fixture_series, fixture_chain):
    with pytest.raises(ValueError):
        scale_report([], fixture_series)
    with pytest.raises(ValueError):
        scale_report(fixture_chain.yearly, fixture_series, [(1990, 1995)])
