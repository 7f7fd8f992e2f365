import json
import subprocess
import sys
from pathlib import Path

import pytest

from hyperdelta.cli import cache_key, run
from hyperdelta.curve import load_curve
from hyperdelta.quadrature import QuadConfig

DATA = Path(__file__).parent / "data"
G2 = str(DATA / "x5m1.json")


def call(args, capsys):
    code = run(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_sigma_poly(capsys):
    code, out, _ = call(["sigma-poly", "--genus", "3"], capsys)
    data = json.loads(out)
    assert code == 0
    assert data["sigma_g"] == {"0,0,6": "1/45", "0,1,3": "-1/3", "0,2,0": "-1/1", "1,0,1": "1/1"}


def test_periods_and_cache(tmp_path, capsys):
    cache = tmp_path / "cache"
    code, out1, err1 = call(["-v", "periods", "--curve", G2, "--cache-dir", str(cache)], capsys)
    assert code == 0 and "event=cache_store" in err1
    code, out2, err2 = call(["-v", "periods", "--curve", G2, "--cache-dir", str(cache)], capsys)
    assert code == 0 and "event=cache_hit" in err2
    assert out1 == out2
    tau = json.loads(out1)["periods"]["tau"]
    assert len(tau) == 2


def test_corrupt_cache_entry_is_recomputed(tmp_path, capsys):
    cache = tmp_path / "cache"
    _, ref, _ = call(["periods", "--curve", G2, "--cache-dir", str(cache)], capsys)
    (entry,) = cache.glob("*.json")
    entry.write_text("{not json")
    code, out, err = call(["periods", "--curve", G2, "--cache-dir", str(cache)], capsys)
    assert code == 0 and "event=cache_corrupt" in err
    assert out == ref


def test_cache_key_depends_on_quadrature_and_ordering():
    c = load_curve(G2)
    assert cache_key(c, quad=QuadConfig(tol=1e-3)) != cache_key(c, quad=QuadConfig(tol=1e-4))
    c2 = load_curve(DATA / "x5mx.json")
    assert cache_key(c) != cache_key(c2)


def test_cache_dir_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("HYPERDELTA_CACHE_DIR", str(tmp_path / "env"))
    assert call(["periods", "--curve", G2], capsys)[0] == 0
    assert list((tmp_path / "env").glob("*.json"))


def test_precision_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("HYPERDELTA_PRECISION", "40")
    code, _, err = call(["check", "thomae", "--curve", G2], capsys)
    assert code == 2 and "53 bits" in err
    monkeypatch.setenv("HYPERDELTA_PRECISION", "many")
    assert call(["check", "thomae", "--curve", G2], capsys)[0] == 2


@pytest.mark.parametrize("check", ["thomae", "disc"])
def test_identity_checks(check, capsys):
    code, out, _ = call(["check", check, "--curve", str(DATA / "x5mx.json")], capsys)
    data = json.loads(out)
    assert code == 0 and data["passed"] and data["residuals"][0]["value"] < 1e-10


def test_theta_eval(tmp_path, capsys):
    tau = tmp_path / "tau.json"
    tau.write_text(json.dumps([[[0, 1]]]))
    code, out, _ = call(["theta-eval", "--tau", str(tau), "--z", "[[0, 0]]"], capsys)
    data = json.loads(out)
    assert code == 0 and abs(data["values"][0][0] - 1.08643481121331) < 1e-13
    assert data["inputs"]["char"] == "[0;0]/2"
    code, out, _ = call(["theta-eval", "--curve", G2, "--z", "[[0, 0], [0, 0]]"], capsys)
    assert code == 0 and json.loads(out)["inputs"]["char"] == "[11;01]/2"


@pytest.mark.parametrize("args", [
    ["periods", "--curve", "missing.json"],
    ["periods"],
    ["periods", "--curve", G2, "--unknown-flag"],
    ["invariants", "--curve", G2, "--quad-tol", "-1"],
    ["theta-eval", "--z", "[0]"],
    ["theta-eval", "--curve", G2, "--z", "[1, 2, 3]"],
    ["sigma-poly", "--genus", "0"],
    ["check", "g2-remark", "--curve", str(DATA / "x7mx.json")],
    ["bogus"],
])
def test_usage_errors_exit_2(args, capsys):
    assert call(args, capsys)[0] == 2


def test_invalid_curve_file(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"coefficients": [2, 0, 0, 0, 0, 1]}))
    code, _, err = call(["periods", "--curve", str(p)], capsys)
    assert code == 2 and "monic" in err


def test_fast_invariants_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = call(["invariants", "--curve", G2, "--checks", "fast", "--output", str(out)], capsys)
    data = json.loads(out.read_text())
    assert code == 0 and data["passed"] and data["schema"] == "hyperdelta.report/1"
    names = {r["name"] for r in data["residuals"]}
    assert {"thomae", "disc", "leading_A", "leading_B", "T_closed"} <= names
    assert "S" not in data["values"]


@pytest.mark.slow
def test_main_check_exit_code(capsys):
    code, out, _ = call(["check", "main", "--curve", G2], capsys)
    data = json.loads(out)
    assert code == 0 and data["passed"]
    assert sum(r["name"].startswith("thm_main[") for r in data["residuals"]) == 6


def test_console_script_runs():
    res = subprocess.run([sys.executable, "-m", "hyperdelta.cli", "sigma-poly", "--genus", "1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and json.loads(res.stdout)["sigma_g"] == {"1": "1/1"}
