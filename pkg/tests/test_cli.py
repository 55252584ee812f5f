import csv
import json

import pytest

from smtj_ising import cli
from smtj_ising.bench import OUT_ENV
from smtj_ising.device import DeviceParams, p_ap


def main(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_spin_report(tmp_path, capsys):
    code, out, _ = main(capsys, "spin-report", "--out", str(tmp_path))
    assert code == 0
    with (tmp_path / "spin_report.csv").open() as fh:
        rows = {r["name"]: r for r in csv.DictReader(fh)}
    assert rows["st70"]["conventional"] == "4761"
    assert rows["burma14"]["conventional"] == "169"
    assert all(int(r["ours"]) <= 81 for r in rows.values())
    assert "4761" in out


def test_solve_ctsp_returns_a_tour_with_the_pair(tmp_path, capsys):
    code, out, _ = main(capsys, "solve-ctsp", "--n", "8", "--pair", "2", "5", "--seed", "3",
                        "--trials", "2", "--out", str(tmp_path))
    assert code == 0
    doc = json.loads((tmp_path / "solve_ctsp.json").read_text())
    order = doc["summary"]["best_order"]
    k = order.index(2)
    assert 5 in (order[k - 1], order[(k + 1) % len(order)])
    assert (tmp_path / "solve_ctsp_run0_trajectory.csv").exists()
    assert "best tour length" in out


def test_solve_tsp_from_a_file(tmp_path, capsys):
    p = tmp_path / "sq.tsp"
    p.write_text("NAME : sq\nDIMENSION : 4\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n"
                 "1 0 0\n2 0 10\n3 10 10\n4 10 0\nEOF\n")
    code, out, _ = main(capsys, "solve-tsp", "--input", str(p), "--iters", "500", "--out", str(tmp_path))
    assert code == 0
    assert "best tour length 40" in out


def test_budget_too_small_for_direct_solve(tmp_path, capsys):
    code, _, err = main(capsys, "solve-tsp", "--input", "st70", "--budget", "81", "--out", str(tmp_path))
    assert code == 2
    assert "4761" in err and "pipeline" in err


@pytest.mark.parametrize("argv", [
    ["solve-tsp", "--bogus"],
    ["solve-tsp"],
    ["solve-tsp", "--n", "5", "--seed", "-1"],
    ["solve-tsp", "--input", "nowhere.tsp"],
    ["solve-tsp", "--input", "burma14"],
    ["solve-ctsp", "--n", "5"],
    ["solve-ctsp", "--n", "5", "--pair", "1", "9"],
    ["solve-tsp", "--n", "5", "--schedule", "cosine:1"],
    ["calibrate"],
])
def test_usage_errors_exit_2(argv, tmp_path, capsys):
    code, _, _ = main(capsys, *argv, "--out", str(tmp_path))
    assert code == 2


def test_no_valid_tour_exits_1(tmp_path, capsys):
    # c = 0 leaves the spins uniformly random, which almost never decodes
    code, _, err = main(capsys, "solve-tsp", "--n", "7", "--iters", "3", "--schedule", "constant:0",
                        "--out", str(tmp_path))
    assert code == 1
    assert "no valid tour" in err


def test_device_trace_and_calibrate(tmp_path, capsys):
    code, out, _ = main(capsys, "device-trace", "--currents", "3.4,3.9,4.4", "--samples", "20000",
                        "--seed", "1", "--out", str(tmp_path))
    assert code == 0
    doc = json.loads((tmp_path / "device_trace.json").read_text())
    for row in doc["traces"]:
        assert row["occupancy"] == pytest.approx(p_ap(DeviceParams(), row["current_uA"]), abs=0.02)
    traces = sorted(str(p) for p in tmp_path.glob("trace_*uA.csv"))
    argv = ["calibrate", "--out", str(tmp_path)]
    for t in traces:
        argv += ["--input", t]
    code, out, _ = main(capsys, *argv)
    assert code == 0
    fit = json.loads((tmp_path / "calibrate.json").read_text())
    assert fit["a"] == pytest.approx(4.67, rel=0.1) and fit["b"] == pytest.approx(3.9, abs=0.05)


def test_success_curve_small(tmp_path, capsys):
    code, out, _ = main(capsys, "success-curve", "--sizes", "5,6", "--trials", "5", "--iters", "2000",
                        "--out", str(tmp_path))
    assert code == 0
    with (tmp_path / "success_curve.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "iteration", "success_probability"]
    assert {r[0] for r in rows[1:]} == {"5", "6"}
    assert "n=5: success probability" in out


def test_pipeline_small(tmp_path, capsys):
    code, out, _ = main(capsys, "pipeline", "--n", "24", "--budget", "49", "--passes", "1",
                        "--iters", "2000", "--out", str(tmp_path))
    assert code == 0
    doc = json.loads((tmp_path / "pipeline.json").read_text())
    assert doc["report"]["max_spins"] <= 49
    assert sorted(doc["report"]["final_order"]) == list(range(24))
    assert doc["config"]["window_passes"] == 1


def test_out_dir_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env"))
    code, _, _ = main(capsys, "spin-report")
    assert code == 0
    assert (tmp_path / "env" / "spin_report.json").exists()


def test_help_exits_0(capsys):
    code, out, _ = main(capsys, "--help")
    assert code == 0 and "pipeline" in out
