import pytest

from dsdcarbon.dsd import chain_decompositions
from dsdcarbon.ingest import generate_fixture
from dsdcarbon.model import FactorState, intensity_series

STAGES = [(2000, 2005), (2005, 2010), (2010, 2015), (2015, 2020)]


def state(e=0.1, p=3.0, g=1000.0, s=0.5, k=(2.0,), w=(1.0,), year=None):
    return FactorState.from_factors(e, p, g, s, k, w, year=year)


@pytest.fixture(scope="session")
def fixture_series():
    return generate_fixture(seed=1, years=21, m=6)


@pytest.fixture(scope="session")
def fixture_states(fixture_series):
    return intensity_series(fixture_series)


@pytest.fixture(scope="session")
def fixture_chain(fixture_states):
    return chain_decompositions(fixture_states, STAGES, 16000)


@pytest.fixture
def fixture_files(tmp_path, fixture_series):
    from dsdcarbon.ingest import save_csv

    csv_path = tmp_path / "fixture.csv"
    man_path = tmp_path / "fixture.manifest"
    save_csv(fixture_series, csv_path, man_path)
    return csv_path, man_path


def with_absent_end_use(series, end_use="space_heating"):
    """Declare ``end_use`` with zero energy and emissions in every year."""
    from dataclasses import replace

    from dsdcarbon.model import CANONICAL_END_USES, CountrySeries, EndUse

    labels = dict(CANONICAL_END_USES)
    order = [u for u, _ in CANONICAL_END_USES if u in series.end_use_ids or u == end_use]
    obs = [
        replace(o, energy={u: o.energy.get(u, 0.0) for u in order},
                emissions={u: o.emissions.get(u, 0.0) for u in order})
        for o in series.observations
    ]
    return CountrySeries(series.country, tuple(EndUse(u, labels[u]) for u in order), obs)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for ac in sorted(results, key=lambda a: int(a[2:])):
        ok, detail = results[ac]
        terminalreporter.write_line(f"{ac} {'PASS' if ok else 'FAIL'}: {detail}")
