import io
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from spendnet.cli import main

DATA = Path(__file__).resolve().parents[1] / "src" / "spendnet" / "data"
NET51 = str(DATA / "paper_5_1.json")
NET52 = str(DATA / "paper_5_2.json")


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def fields(text):
    return dict(line.split(": ", 1) for line in text.splitlines() if ": " in line)


def test_validate_ok():
    assert run("validate", NET51) == (0, "ok\n")


def test_validate_reports_violations(tmp_path):
    data = json.loads(Path(NET51).read_text())
    data["P"][0][1] = 0.9
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    code, text = run("validate", str(path))
    assert code == 1
    assert text.startswith("violation column-stochastic")


@pytest.mark.parametrize("content", ["{not json", '{"P": [[1]]}'])
def test_malformed_file(tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    assert run("validate", str(path))[0] == 1
    assert run("stationary", str(path))[0] == 1


def test_missing_file(tmp_path):
    assert run("stationary", str(tmp_path / "nope.json"))[0] == 1


def test_stationary():
    code, text = run("stationary", NET52)
    f = fields(text)
    assert code == 0
    assert f["method"] == "direct"
    assert f["total"] == "10"
    x = [float(t) for t in f["x"].split()]
    assert sum(x) == pytest.approx(10, rel=1e-12)
    assert float(f["residual"]) <= 1e-10


def test_stationary_reducible_exits_two(tmp_path):
    path = tmp_path / "r.json"
    path.write_text(json.dumps({"n": 2, "P": [[1, 0], [0, 1]], "U": [[1, 1], [1, 1]], "C": [[1, 1], [1, 1]], "x0": [1, 1]}))
    assert run("stationary", str(path))[0] == 2


def test_simulate_writes_csv(tmp_path):
    path = tmp_path / "t.csv"
    code, text = run("simulate", NET51, "--steps", "10", "--csv", str(path))
    assert code == 0
    assert fields(text)["steps"] == "10"
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x_1,x_2,x_3" and len(lines) == 12


def test_optimize(tmp_path):
    trace = tmp_path / "g.csv"
    code, text = run("optimize", NET51, "--agent", "1", "--grid", "51", "--refine", "1", "--trace", str(trace))
    f = fields(text)
    assert code == 0
    assert float(f["W_star"]) >= float(f["W_myopic"])
    assert f["result_irreducible"] == "true"
    lines = trace.read_text().splitlines()
    assert lines[0] == "v,feasible,objective"
    assert len(lines) - 1 == int(f["examined"])


def test_real_price_dynamic_with_oracle():
    code, text = run("real-price", NET52, "--agent", "1", "--provider", "2", "--mode", "dynamic", "--a", "0,2,0", "--oracle")
    f = fields(text)
    assert code == 0
    assert float(f["relative_difference"]) <= 1e-5
    assert f["label_price"] == "0.5"


def test_real_price_fixed_literal():
    code, text = run("real-price", NET52, "--agent", "1", "--provider", "3", "--mode", "fixed", "--literal-paper-formula")
    assert code == 0
    assert "non-default" in fields(text)["mode"]


def test_negative_marginal_flag(tmp_path):
    data = json.loads(Path(NET52).read_text())
    for i, v in enumerate((0.97, 0.01, 0.02)):
        data["P"][i][1] = v
    path = tmp_path / "n.json"
    path.write_text(json.dumps(data))
    code, text = run("real-price", str(path), "--agent", "1", "--provider", "3", "--mode", "dynamic")
    assert code == 0
    assert fields(text)["flag"] == "negative-marginal"


def test_real_price_dynamic_reducible_exits_two():
    assert run("real-price", NET52, "--agent", "1", "--provider", "2", "--mode", "dynamic", "--a", "1,0,0")[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate", NET51],
        ["stationary", NET51, "--bogus"],
        ["optimize", NET51],
        ["optimize", NET51, "--agent", "4"],
        ["real-price", NET52, "--agent", "1", "--provider", "2", "--mode", "dynamic", "--a", "0,2"],
        ["real-price", NET52, "--agent", "1", "--provider", "2", "--mode", "dynamic", "--a", "x,y,z"],
        ["real-price", NET52, "--agent", "1", "--provider", "2", "--mode", "dynamic", "--literal-paper-formula"],
        ["sweep", NET52, "--scenario", "fig2", "--out", "x.csv", "--alphas", "0.5:0.1:0.1"],
        ["sweep", NET52, "--scenario", "fig2", "--out", "x.csv", "--alphas", "0.5:0.1:1.2"],
    ],
)
def test_usage_errors(argv):
    assert run(*argv)[0] == 64


def test_sweep_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = [NET52, "--scenario", "fig2", "--alphas", "0.1:0.2:0.9"]
    assert run("sweep", *args, "--out", str(a))[0] == 0
    assert run("sweep", *args, "--out", str(b), "--workers", "2")[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_identical_invocations_identical_output():
    argv = ("real-price", NET52, "--agent", "1", "--provider", "3", "--mode", "dynamic", "--oracle")
    assert run(*argv) == run(*argv)


def test_console_script():
    exe = shutil.which("spendnet")
    cmd = [exe] if exe else [sys.executable, "-m", "spendnet.cli"]
    proc = subprocess.run(cmd + ["validate", NET52], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "ok\n"
