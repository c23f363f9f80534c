import json
import subprocess
import sys

import pytest

from wavefront.cli import RunConfig, main, resolve_speed, build_params
from wavefront.errors import ConfigurationError

BZ = {"model": "belousov_zhabotinskii", "r": 0.5, "b": 0.5, "tau": 1.0, "c": 2.5, "L": 150, "h": 0.02}
PP = {"model": "predator_prey", "d1": 1.0, "d2": 3.0, "r": 1.0, "P": 1.0, "a": 1.0, "b": 1.0, "nu": 0.5, "tau": 1.0, "c": 2.5}


def write_cfg(tmp_path, raw, name="cfg.json"):
    path = tmp_path / name
    raw = dict(raw)
    raw.setdefault("output_dir", str(tmp_path / "out"))
    path.write_text(json.dumps(raw))
    return str(path)


def test_cstar_prints_value(tmp_path, capsys):
    assert main(["cstar", "--config", write_cfg(tmp_path, PP)]) == 0
    assert capsys.readouterr().out.strip() == "c* = 2.0"
    assert main(["cstar", "--config", write_cfg(tmp_path, dict(PP, P=0.45, nu=0.4))]) == 0
    assert "Corollary branch" in capsys.readouterr().out
    assert main(["cstar", "--config", write_cfg(tmp_path, BZ)]) == 0
    assert capsys.readouterr().out.strip() == "admissible c > max(2, 0.5) = 2.0"


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["solve", "--config", write_cfg(tmp_path, dict(BZ, colour="red"))]) == 2
    assert main(["solve", "--config", write_cfg(tmp_path, dict(BZ, b=1.5))]) == 2
    assert main(["solve", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["solve"]) == 2
    assert main(["verify", "--config", write_cfg(tmp_path, dict(PP, c=1.0))]) == 2  # complex rates
    missing = dict(BZ)
    del missing["b"]
    assert main(["cstar", "--config", write_cfg(tmp_path, missing)]) == 2
    assert "error" in capsys.readouterr().err


def test_unknown_key_rejected():
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict(dict(BZ, foo=1))


def test_speed_sentinel():
    pp = RunConfig.from_dict(dict(PP, c=0))
    assert resolve_speed(pp, build_params(pp)) == pytest.approx(2.2)
    bz = RunConfig.from_dict(dict(BZ, c=0))
    assert resolve_speed(bz, build_params(bz)) == pytest.approx(2.2)


def test_verify_bz_passes(tmp_path, capsys):
    assert main(["verify", "--config", write_cfg(tmp_path, dict(BZ, L=40, h=0.01))]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["passed"] and out["upper"]["construction"] == "slow-rate C1"
    assert out["upper"]["rejected"][0]["construction"] == "displayed"


def test_verify_pp_fails_on_monotonicity(tmp_path, capsys):
    assert main(["verify", "--config", write_cfg(tmp_path, dict(PP, L=40, h=0.01))]) == 3
    out = json.loads(capsys.readouterr().out)
    assert not out["quasi_monotone"]["passed"]
    assert out["upper"]["report"]["passed"] and out["lower"]["report"]["passed"]


def test_solve_and_simulate_bz(tmp_path, capsys):
    cfg = write_cfg(tmp_path, dict(BZ, sim_T=2.0))
    odir = tmp_path / "out"
    assert main(["solve", "--config", cfg]) == 0
    files = {p: (odir / p).read_bytes() for p in ("profile.csv", "trace.csv", "summary.json")}
    summary = json.loads(files["summary.json"])
    assert summary["converged"] and summary["final_delta"] <= 1e-8
    assert files["profile.csv"].splitlines()[0] == b"t,phi1,phi2"
    assert main(["solve", "--config", cfg]) == 0
    for p, content in files.items():
        assert (odir / p).read_bytes() == content, p
    assert main(["simulate", "--config", cfg]) == 0
    sim = json.loads((odir / "summary.json").read_text())["simulation"]
    assert sim["relative_speed_error"] < 0.05
    assert (odir / "snapshots").is_dir() and any((odir / "snapshots").iterdir())


def test_simulate_self_test(tmp_path):
    cfg = write_cfg(tmp_path, dict(BZ, sim_T=2.0, self_test=True))
    assert main(["simulate", "--config", cfg]) == 0
    sim = json.loads((tmp_path / "out" / "summary.json").read_text())["simulation"]
    assert abs(sim["measured_speed"] - 2.5) <= 1e-6


def test_solve_pp_reports_certification_failure(tmp_path):
    assert main(["solve", "--config", write_cfg(tmp_path, dict(PP, L=40, h=0.01, trials=10000))]) == 3
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["status"] == "certification_failed"


def test_counterexample_needs_no_config(capsys):
    assert main(["counterexample"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["nonuniqueness"]["sup_norm"] == 1.0
    assert out["identity"]["at_zero"] == pytest.approx(1.0, abs=1e-9)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "wavefront", "counterexample"], capture_output=True, text=True)
    assert proc.returncode == 0 and "nonuniqueness" in proc.stdout
