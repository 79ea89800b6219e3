"""CLI integration tests driven through subprocess."""

import json
import os
import subprocess
import sys

import pytest

CLI = os.environ.get("SEQGRAD_CLI")

pytestmark = pytest.mark.skipif(not CLI, reason="SEQGRAD_CLI not set")


def run_cli(*args, **kwargs):
    return subprocess.run([CLI, *args], capture_output=True, text=True, **kwargs)


def test_list():
    result = run_cli("list")
    assert result.returncode == 0
    assert sum(1 for line in result.stdout.splitlines() if "(M=" in line) >= 5


def test_run_and_verify(tmp_path):
    out = tmp_path / "runs"
    result = run_cli("run", "--scenario", "quadratic_ab", "--out", str(out))
    assert result.returncode == 0, result.stderr
    doc = json.loads((out / "run_0.json").read_text())
    assert doc["verdict"]["status"] == "converged"
    point = doc["verdict"]["point"]
    assert abs(point[0]) < 1e-6 and abs(point[1]) < 1e-6

    verify = run_cli("verify", str(out))
    assert verify.returncode == 0, verify.stdout


def test_exit_code_on_truncated_run(tmp_path):
    result = run_cli("run", "--scenario", "quadratic_ab", "--max-steps", "1", "--out",
                     str(tmp_path / "r"))
    assert result.returncode == 2


def test_exit_code_on_bad_scenario(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    result = run_cli("run", "--scenario", str(bad), "--out", str(tmp_path / "r"))
    assert result.returncode == 1


def test_verify_flags_corruption(tmp_path):
    out = tmp_path / "runs"
    assert run_cli("run", "--scenario", "quadratic_ab", "--out", str(out)).returncode == 0
    doc = json.loads((out / "run_0.json").read_text())
    doc["steps"][1]["phi"] = doc["steps"][0]["phi"] + 1.0
    (out / "run_0.json").write_text(json.dumps(doc))
    verify = run_cli("verify", str(out))
    assert verify.returncode == 2
    assert "monotone_descent" in verify.stdout


def test_verify_empty_directory(tmp_path):
    result = run_cli("verify", str(tmp_path))
    assert result.returncode == 1


def test_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        result = run_cli("run", "--scenario", "saddle_basin2d", "--random-starts", "3", "--seed",
                         "11", "--out", str(out), "--analyze", "loja")
        assert result.returncode == 0
    for name in ("run_0.json", "run_1.json", "run_2.json", "trajectory_2.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_estimate(tmp_path):
    out = tmp_path / "est.json"
    result = run_cli("estimate", "--scenario", "quadratic_ab", "--at", "0,0", "--out", str(out))
    assert result.returncode == 0
    doc = json.loads(out.read_text())
    assert 0.45 <= doc["mu"] <= 0.55
    assert doc["verified"]


def test_perturb(tmp_path):
    scen = tmp_path / "perturbed.json"
    rep = tmp_path / "report.json"
    result = run_cli("perturb", "--scenario", "saddle_basin2d", "--center", "0.3,-0.2", "--b",
                     "1e-3", "--out-scenario", str(scen), "--out-report", str(rep))
    assert result.returncode == 0, result.stderr
    doc = json.loads(rep.read_text())
    assert doc["minimum"]["classification"]["kind"] == "minimum"
    assert doc["fixes"]["p_error"] < 1e-12

    # The perturbed scenario file is itself runnable.
    result = run_cli("run", "--scenario", str(scen), "--start", "0.5,0.5", "--out",
                     str(tmp_path / "pr"), "--quiet")
    assert result.returncode == 0

    oversized = run_cli("perturb", "--scenario", "saddle_basin2d", "--center", "0.3,-0.2", "--b",
                        "0.9")
    assert oversized.returncode == 1
    assert "bound" in oversized.stderr


def test_list_export_round_trip(tmp_path):
    out = tmp_path / "scenarios"
    assert run_cli("list", "--export", str(out)).returncode == 0
    files = sorted(p.name for p in out.iterdir())
    assert "quadratic_ab.json" in files and len(files) >= 5
    result = run_cli("run", "--scenario", str(out / "quadratic_ab.json"), "--start", "1,1",
                     "--out", str(tmp_path / "r"), "--quiet")
    assert result.returncode == 0
