import csv
import json

import pytest

from dsdcarbon import cli
from dsdcarbon.errors import SingularMatrix

SEG = ["--segments", "2000"]


def run(*argv):
    return cli.main([str(a) for a in argv])


def data_args(files):
    csv_path, man_path = files
    return ["--input", csv_path, "--manifest", man_path]


def read_csv(path):
    lines = path.read_text().splitlines()
    return list(csv.DictReader(lines[:-1])), lines[-1]


@pytest.mark.parametrize("command, stems", [
    ("decompose", ["contributions_yearly", "contributions_stages", "contributions_cumulative",
                   "rates", "fig3", "fig4", "fig5"]),
    ("compare", ["paired_contributions", "lmdi", "regression"]),
    ("metrics", ["decarb_report", "fig6", "fig7"]),
])
def test_commands_write_outputs(tmp_path, fixture_files, command, stems):
    out = tmp_path / "out"
    assert run(command, *data_args(fixture_files), *SEG, "--format", "csv,json,svg",
               "--out", out) == 0
    names = {p.stem for p in out.iterdir()}
    assert set(stems) <= names


def test_metadata_line_and_json_mirror(tmp_path, fixture_files):
    out = tmp_path / "o"
    assert run("decompose", *data_args(fixture_files), *SEG, "--format", "csv,json",
               "--out", out) == 0
    rows, meta = read_csv(out / "contributions_yearly.csv")
    assert meta.startswith("# tool=dsdcarbon, version=0.1.0, N=2000, input_sha256=")
    doc = json.loads((out / "contributions_yearly.json").read_text())
    assert doc["meta"]["N"] == 2000
    assert len(doc["rows"]) == len(rows) == 20
    for r, j in zip(rows, doc["rows"]):
        for k, v in r.items():
            if j[k] is None or isinstance(j[k], str):
                continue
            assert float(v) == j[k]


def test_segments_affect_residual(tmp_path, fixture_files):
    res = {}
    for n in (1, 16000):
        out = tmp_path / str(n)
        assert run("decompose", *data_args(fixture_files), "--segments", n, "--out", out) == 0
        rows, _ = read_csv(out / "contributions_yearly.csv")
        res[n] = max(abs(float(r["residual"])) for r in rows)
    assert res[16000] < res[1] / 1000


def test_reruns_are_byte_identical(tmp_path, fixture_files):
    outs = []
    for tag in "ab":
        out = tmp_path / tag
        assert run("compare", *data_args(fixture_files), *SEG, "--format", "csv,json",
                   "--out", out) == 0
        outs.append({p.name: p.read_bytes() for p in out.iterdir()})
    assert outs[0] == outs[1]


def test_scenario_preset(tmp_path, fixture_files, capsys):
    out = tmp_path / "s"
    assert run("scenario", "--preset", "china", *data_args(fixture_files), "--out", out) == 0
    assert "MtCO2" in capsys.readouterr().out
    rows, _ = read_csv(out / "scenario.csv")
    assert rows


def test_scenario_flag_override(tmp_path, fixture_files):
    out = tmp_path / "s"
    assert run("scenario", "--preset", "china", "--e-hh-base", "700", "--k-elec-base", "5.0",
               "--out", out) == 0


def test_fixture_command(tmp_path):
    assert run("fixture", "--m", "5", "--out", tmp_path, "--name", "ind") == 0
    assert (tmp_path / "ind.csv").exists() and (tmp_path / "ind.manifest").exists()


def test_validation_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("#@ end_uses = cooking\nyear,P,H,GDP,HCE,E_cooking,C_cooking\n"
                   "2000,10,4,100,50,0,2\n2001,10,4,100,50,1,2\n")
    assert run("decompose", "--input", bad, "--out", tmp_path) == 2
    assert "row 3" in capsys.readouterr().err


def test_range_and_country_errors(tmp_path, fixture_files):
    assert run("decompose", *data_args(fixture_files), "--from", 1990, "--out", tmp_path) == 2
    assert run("decompose", *data_args(fixture_files), "--country", "ZZZ",
               "--out", tmp_path) == 2
    assert run("decompose", "--input", tmp_path / "nope.csv", "--out", tmp_path) == 2


def test_numerical_exit_code(tmp_path, fixture_files, monkeypatch):
    import dsdcarbon.dsd as dsd

    def boom(*a, **k):
        raise SingularMatrix("pivot below tolerance")

    monkeypatch.setattr(dsd, "solve_batched", boom)
    assert run("decompose", *data_args(fixture_files), *SEG, "--out", tmp_path) == 3


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        run("decompose", "--bogus")
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        run("decompose", "--input", "x.csv", "--segments", "0")
    assert exc.value.code == 2
