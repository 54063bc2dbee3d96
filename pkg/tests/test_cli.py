import csv
import io
import json
import math
import subprocess
import sys

import pytest

from ngmzi import cli
from ngmzi.errors import ConsistencyError
from ngmzi.explorer import Record, SweepSpec, run_sweep
from ngmzi.interferometry import phase_sensitivity, sensitivity_diff
from ngmzi.phase_space import MZIScenario, NGOpParams
from ngmzi.states import success_probability


def run_json(capsys, argv):
    code = cli.main(argv)
    return code, json.loads(capsys.readouterr().out)


def test_sensitivity_matches_library(capsys):
    code, out = run_json(capsys, ["sensitivity", "--r", "0.5", "--tau", "0.9", "--m", "1", "--n", "0"])
    s = MZIScenario(NGOpParams(0.5, 0.9, 1, 0))
    assert code == 0
    assert out["delta_phi"] == phase_sensitivity(s).delta_phi
    assert out["d_ng"] == sensitivity_diff(s)
    assert out["p_ng"] == success_probability(s.ng)
    assert out["flags"] == []


def test_sensitivity_divergence_is_null(capsys):
    code, out = run_json(capsys, ["sensitivity", "--r", "0", "--tau", "1", "--m", "0", "--n", "0", "--phi", "0"])
    assert code == 0
    assert out["delta_phi"] is None and "divergent" in out["flags"]


def test_sensitivity_with_oracle(capsys):
    code, out = run_json(capsys, ["sensitivity", "--m", "0", "--n", "2", "--phi", "0.2", "--oracle"])
    assert code == 0
    assert out["oracle_abs_diff"] < 1e-6


@pytest.mark.parametrize(
    "argv",
    [["sensitivity", "--tau", "1.5"], ["sensitivity", "--m", "-1"], ["sweep"],
     ["sweep", "--axis", "r", "--from", "1", "--to", "0"], ["grid", "--states", "0,1;1,0"],
     ["sweep", "--fig", "4a"], ["bogus"], ["sweep", "--axis", "r", "--from", "0", "--to", "1", "--states", "x"]],
)
def test_usage_errors(argv, capsys):
    assert cli.main(argv) == cli.EXIT_USAGE


def test_consistency_failure_exit_code(monkeypatch, capsys):
    def broken(s):
        raise ConsistencyError("boom")

    monkeypatch.setattr(cli, "sensitivity_record", broken)
    assert cli.main(["sensitivity"]) == cli.EXIT_CONSISTENCY


def test_csv_header_and_rows(capsys):
    argv = ["sweep", "--axis", "tau", "--from", "0.2", "--to", "0.8", "--points", "3", "--states", "0,1;2,0"]
    assert cli.main(argv) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == Record.columns()
    assert len(rows) == 7
    direct = run_sweep(SweepSpec("tau", 0.2, 0.8, 3, ((0, 1), (2, 0))), workers=1)
    assert float(rows[4][rows[0].index("d_ng")]) == direct[3].d_ng


def test_json_table(capsys):
    code = cli.main(["sweep", "--fig", "2a", "--points", "3", "--format", "json"])
    rows = json.loads(capsys.readouterr().out)
    assert code == 0 and len(rows) == 9
    assert set(rows[0]) == set(Record.columns())


def test_file_output_is_byte_stable_with_sidecar(tmp_path):
    out = tmp_path / "sweep.csv"
    argv = ["sweep", "--fig", "3a", "--points", "4", "--out", str(out), "--workers", "1"]
    assert cli.main(argv) == 0
    first = out.read_bytes()
    meta = json.loads((tmp_path / "sweep.csv.meta.json").read_text())
    assert meta["rows"] == 12 and meta["package_version"]
    assert cli.main(argv) == 0
    assert out.read_bytes() == first
    assert not [p for p in tmp_path.iterdir() if p.name.startswith(".tmp-")]


def test_no_meta_flag(tmp_path):
    out = tmp_path / "g.csv"
    assert cli.main(["grid", "--fig", "4a", "--points", "3", "--out", str(out), "--no-meta"]) == 0
    assert out.exists() and not (tmp_path / "g.csv.meta.json").exists()
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 9 and {r["m"] + r["n"] for r in rows} == {"01"}


def test_probability_only_grid(capsys):
    assert cli.main(["grid", "--states", "1,1", "--points", "2", "--probability-only"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert all(math.isnan(float(r["delta_phi"])) for r in rows)


def test_oracle_check_passes(capsys):
    assert cli.main(["oracle-check"]) == 0
    assert "FAIL" not in capsys.readouterr().out


@pytest.mark.parametrize("rows", [[2, 3], [0]])
def test_oracle_check_catches_sign_mutation(monkeypatch, capsys, rows):
    import ngmzi.interferometry as itf

    original = itf.build_M5

    def mutated(s):
        M = original(s).copy()
        M[rows] *= -1
        return M

    monkeypatch.setattr(itf, "build_M5", mutated)
    assert cli.main(["oracle-check"]) == cli.EXIT_ORACLE
    assert "FAIL" in capsys.readouterr().out


def test_global_sign_of_linear_term_is_unobservable(monkeypatch):
    # only even powers of the linear term survive the balanced-monomial extraction
    import ngmzi.interferometry as itf

    s = MZIScenario(NGOpParams(0.5, 0.7, 1, 2), 2.0, 1.0, 0.4)
    before = itf.parity_expectation(s)
    original = itf.build_M5
    monkeypatch.setattr(itf, "build_M5", lambda sc: -original(sc))
    assert itf.parity_expectation(s) == pytest.approx(before, abs=1e-15)


def test_thread_cap_is_honoured(monkeypatch, capsys):
    monkeypatch.setenv("NGMZI_THREADS", "1")
    assert cli.main(["sweep", "--fig", "5a", "--points", "2", "--workers", "4"]) == 0


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "ngmzi", "sensitivity", "--m", "1", "--n", "1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert "delta_phi" in json.loads(proc.stdout)


def test_full_oracle_suite_passes(capsys):
    assert cli.main(["oracle-check", "--suite", "full"]) == 0
