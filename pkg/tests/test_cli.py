import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest
from scipy import stats

from plaus.cli import main
from plaus.engine.region import intervals_from_curve


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def read_csv_body(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.reader(lines))


def test_eval_exact_binomial(capsys):
    out = run_json(capsys, "eval", "--model", "binomial", "--data", "n=25,y=15", "--theta", "0.6", "--exact")
    assert out["plausibility"] == 1.0
    assert out["method"] == "exact-enumeration"
    meta = out["metadata"]
    assert meta["version"] and meta["config"]["M"] == 50_000 and meta["seed"] == 0


def test_eval_gaussian_pivot(capsys):
    out = run_json(capsys, "eval", "--model", "norm-mean", "--data", "y=0", "--theta", "1.96", "--M", "20000")
    assert abs(out["plausibility"] - 0.05) <= 3 * out["stderr"] + 1e-3


def test_missing_theta_exits_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["eval", "--model", "binomial", "--data", "n=25,y=15"])
    assert info.value.code == 2


@pytest.mark.property
@pytest.mark.parametrize("argv", [
    ["eval", "--model", "nope", "--data", "y=1", "--theta", "1"],
    ["eval", "--model", "binomial", "--theta", "0.5"],
    ["eval", "--model", "binomial", "--data", "n=25,y=15", "--theta", "0.5", "--M", "10"],
    ["eval", "--model", "binomial", "--data", "n=5,y=7", "--theta", "0.5"],
    ["eval", "--model", "norm-mean", "--data", "y=0", "--theta", "0.5", "--exact"],
    ["region", "--model", "norm", "--data", "y=1;2;3"],
    ["baseline", "--method", "cp", "--n", "10"],
])
def test_argument_domain_and_capability_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err and out == ""


@pytest.mark.property
def test_numeric_failure_exits_3(capsys):
    code, _, err = run(capsys, "baseline", "--method", "wald", "--model", "binomial", "--data", "n=10,y=0")
    assert code == 3
    assert "numeric" in err


def test_region_gaussian(capsys):
    out = run_json(capsys, "region", "--model", "norm-mean", "--data", "y=0", "--alpha", "0.05", "--M", "20000",
                   "--points", "64")
    assert len(out["intervals"]) == 1
    lo, hi = out["intervals"][0]
    assert lo == pytest.approx(-1.96, abs=0.05) and hi == pytest.approx(1.96, abs=0.05)


def test_baseline_clopper_pearson(capsys):
    out = run_json(capsys, "baseline", "--method", "cp", "--n", "50", "--y", "25", "--alpha", "0.05")
    assert out["lo"] == pytest.approx(stats.beta.ppf(0.025, 25, 26), abs=1e-12)
    assert out["hi"] == pytest.approx(stats.beta.ppf(0.975, 26, 25), abs=1e-12)


def test_seed_environment_fallback(capsys, monkeypatch):
    argv = ["eval", "--model", "lindley", "--data", "y=0.5;1.5;2", "--theta", "1.2", "--M", "2000"]
    monkeypatch.setenv("PLAUS_SEED", "77")
    env = run_json(capsys, *argv)
    flag = run_json(capsys, *argv, "--seed", "77")
    assert env["metadata"]["seed"] == 77
    assert env["plausibility"] == flag["plausibility"]
    monkeypatch.setenv("PLAUS_SEED", "x")
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_out_file(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "eval", "--model", "binomial", "--data", "n=25,y=15", "--theta", "0.4", "--exact",
                       "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["plausibility"] == pytest.approx(0.06375, abs=1e-4)


def test_data_file(capsys, tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("# lindley sample\ny\n0.5\n1.5\n2.0\n")
    out = run_json(capsys, "eval", "--model", "lindley", "--data", str(path), "--theta", "1.2", "--method", "closed")
    assert 0 < out["plausibility"] < 1


@pytest.mark.property
def test_curve_region_round_trip(capsys):
    common = ["--model", "binomial", "--data", "n=25,y=15"]
    code, text, _ = run(capsys, "curve", *common, "--grid", "0.2:0.95:751", "--full")
    assert code == 0
    rows = read_csv_body(text)
    assert rows[0] == ["theta", "pl", "stderr"]
    grid, pl = np.array(rows[1:], float)[:, :2].T
    assert pl.max() == pytest.approx(1.0)
    region = run_json(capsys, "region", *common, "--method", "exact", "--points", "256")
    cut = intervals_from_curve(grid, pl, 0.05)
    step = grid[1] - grid[0]
    assert len(cut) == len(region["intervals"])
    for (a, b), (lo, hi) in zip(cut, region["intervals"]):
        assert abs(a - lo) <= step + region["endpoint_tol"]
        assert abs(b - hi) <= step + region["endpoint_tol"]


def test_curve_overlay_and_csv_precision(capsys):
    code, text, _ = run(capsys, "curve", "--model", "binomial", "--data", "n=25,y=15", "--grid", "0.3,0.5",
                        "--overlay-mc", "--M", "1000")
    assert code == 0
    assert text.startswith("# version:")
    rows = read_csv_body(text)
    assert rows[0] == ["theta", "pl", "stderr", "pl_mc", "stderr_mc"]
    assert all(len(v.replace("-", "").replace(".", "").lstrip("0").split("e")[0]) <= 6 for v in rows[1][1:])


def test_test_command(capsys):
    out = run_json(capsys, "test", "--model", "binomial", "--data", "n=25,y=15", "--upper", "0.2", "--method",
                   "exact")
    assert out["reject"] is True
    out = run_json(capsys, "test", "--model", "binomial", "--data", "n=25,y=15", "--point", "0.6", "--M", "1000")
    assert out["reject"] is False


def test_pivotcheck_command(capsys):
    out = run_json(capsys, "pivotcheck", "--model", "binomial", "--n", "20", "--theta", "0.2", "--theta", "0.5",
                   "--exact", "--M", "5000")
    assert out["pivotal"] is False
    out = run_json(capsys, "pivotcheck", "--model", "norm", "--n", "10", "--theta", "0,1", "--theta", "2,4",
                   "--M", "5000")
    assert out["pivotal"] is True


def test_sensitivity_command(capsys):
    code, text, _ = run(capsys, "sensitivity", "--lambdas", "1,1", "--M", "1000")
    assert code == 0
    assert "# max_distance: 0.0" in text


def test_coverage_command(capsys, tmp_path):
    spec = {"study": "tiny", "model": "binomial", "truths": [[0.3]], "sizes": [20], "replicates": 100,
            "methods": ["mpl", "cp"], "M": 500, "seed": 3}
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(spec))
    code, text, _ = run(capsys, "coverage", "--study", str(path))
    assert code == 0
    rows = read_csv_body(text)
    assert rows[0] == ["method", "truth", "n", "coverage", "mean_length", "stderr", "replicates"]
    assert [r[0] for r in rows[1:]] == ["cp", "mpl"]


def test_bundled_lindley_study_has_three_methods(capsys):
    code, text, _ = run(capsys, "coverage", "--study", "lindley", "--replicates", "100", "--M", "500")
    assert code == 0
    assert sorted(r[0] for r in read_csv_body(text)[1:]) == ["mpl", "pboot", "wald"]


def test_contour_demo(capsys):
    code, text, _ = run(capsys, "contour", "--demo", "gamma", "--grid1", "3:20:12", "--grid2", "5:35:12",
                        "--M", "500", "--alpha", "0.1")
    assert code == 0
    assert "# levelset" in text and "# wald" in text


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "plaus.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("plaus ")
