import json

import pytest

from risbis import results
from risbis.cli import main

from test_scenario import SMALL


@pytest.fixture
def small(tmp_path):
    p = tmp_path / "small.scenario"
    p.write_text(SMALL)
    return str(p)


def test_solve_table1(tmp_path):
    out = tmp_path / "run"
    assert main(["solve", "--scenario", "table1", "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["max_violation"] <= rep["delta"]
    meta = json.loads((out / "solve.meta.json").read_text())
    assert {"scenario_hash", "seed", "git_describe", "solver"} <= set(meta)


def test_malformed_scenario_exit_2_no_files(tmp_path, capsys):
    bad = tmp_path / "bad.scenario"
    bad.write_text("name = 'x'\n[grid\nrows=1\n")
    out = tmp_path / "never"
    assert main(["solve", "--scenario", str(bad), "--out", str(out)]) == 2
    assert not out.exists()
    assert "line" in capsys.readouterr().err


def test_zero_threshold_infeasible_exit_3(small, tmp_path):
    # suppression point on top of a served user: sigma = 0 forces that user to zero
    code = main(["solve", "--scenario", small, "--out", str(tmp_path / "o"),
                 "--set", "suppression_regions.0.threshold_factor=0.0",
                 "--set", "suppression_regions.0.theta=[20.0, 20.0]"])
    assert code == 3


def test_unknown_study_exit_2(small, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["study", "--scenario", small, "--out", str(tmp_path), "--study", "nope"])
    assert exc.value.code == 2


def test_oracle_too_large_exit_2(tmp_path):
    assert main(["oracle", "--scenario", "table1", "--out", str(tmp_path / "o"),
                 "--oracle-bits", "6"]) == 2


def test_sweep_writes_901_rows(small, tmp_path):
    assert main(["sweep", "--scenario", small, "--out", str(tmp_path)]) == 0
    for name in ("pattern_nonconstraint.csv", "pattern_bis.csv"):
        assert len(results.read_table(tmp_path / name)) == 901


def test_compare_with_oracle(small, tmp_path):
    assert main(["compare", "--scenario", small, "--out", str(tmp_path), "--oracle-bits", "6"]) == 0
    rows = {r["method"]: r for r in results.read_table(tmp_path / "metrics.csv")}
    assert set(rows) == {"Non-Constraint", "BIS", "QuantRand", "Oracle-6bit"}
    bis, orc = float(rows["BIS"]["min_ue_power_w"]), float(rows["Oracle-6bit"]["min_ue_power_w"])
    assert bis >= orc * 0.98


def test_compare_equal_weights_ratio(tmp_path):
    assert main(["compare", "--scenario", "table2_compare", "--out", str(tmp_path)]) == 0
    rows = {r["method"]: r for r in results.read_table(tmp_path / "metrics.csv")}
    ratio = [float(v) for v in rows["BIS"]["power_ratio"].split(":")]
    assert all(abs(v - 1) <= 0.01 for v in ratio)


def test_study_cdf_trials(small, tmp_path):
    assert main(["study", "--scenario", small, "--out", str(tmp_path), "--study", "cdf",
                 "--trials", "20"]) == 0
    rows = results.read_table(tmp_path / "cdf.csv")
    bis = [r for r in rows if r["method"] == "BIS" and r["metric"] == "min_ue"]
    assert len(bis) == 20
    assert float(bis[-1]["cdf"]) == 1.0


def test_study_rg_grid(small, tmp_path):
    assert main(["study", "--scenario", small, "--out", str(tmp_path), "--study", "rg",
                 "--trials", "1", "--set", "study.n_grid=[2, 3, 4, 5]"]) == 0
    rows = results.read_table(tmp_path / "rg.csv")
    assert [r["n_units"] for r in rows if r["method"] == "BIS"] == ["2", "3", "4", "5"]
