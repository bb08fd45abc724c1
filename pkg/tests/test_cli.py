"""
命令行端到端测试
"""

import json

import numpy as np
import pytest
import yaml

from app_cli import main
from core.export import read_csv, read_csv_metadata


@pytest.fixture
def settings_file(tmp_path):
    path = tmp_path / "settings.yaml"
    path.write_text(yaml.safe_dump({
        "runtime": {
            "threads": 2,
            "logs_dir": str(tmp_path / "logs"),
            "output_dir": str(tmp_path / "outputs"),
            "log_files": False,
        },
    }), encoding="utf-8")
    return str(path)


@pytest.fixture
def run(settings_file):
    def _run(*argv):
        return main(["--settings", settings_file, *argv])
    return _run


def _write_json(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def test_zero_diffusion_gives_identity(run, tmp_path):
    config = _write_json(tmp_path, "ptm.json", {"channel": {"kind": "normal1q"}})
    out = tmp_path / "ptm_result.json"
    assert run("ptm", "--config", config, "--out", str(out)) == 0
    document = json.loads(out.read_text(encoding="utf-8"))
    np.testing.assert_allclose(document["result"]["R"], np.eye(3), atol=1e-15)
    assert document["metadata"]["command"] == "ptm"


def test_choi_fourier_method(run, tmp_path):
    config = _write_json(tmp_path, "choi.json", {
        "channel": {"kind": "normal1q", "A": [[0.3, 0, 0], [0, 0.2, 0], [0, 0, 0.1]], "b": [0, 0, 0.4]},
        "method": "fourier",
    })
    out = tmp_path / "choi_result.json"
    assert run("choi", "--config", config, "--out", str(out)) == 0
    result = json.loads(out.read_text(encoding="utf-8"))["result"]
    assert result["method"] == "fourier"
    assert result["cptp"]["min_eigenvalue"] > -1e-9


def test_emit_config_round_trip(run, tmp_path, capsys):
    assert run("distill", "--emit-config") == 0
    emitted = json.loads(capsys.readouterr().out)
    assert emitted["model"] == "c2"
    assert emitted["corr_values"] == [1.0, 0.8, 0.5, 0.0, -0.5, -1.0]

    config = _write_json(tmp_path, "distill.json", emitted)
    assert run("distill", "--config", config, "--emit-config") == 0
    assert json.loads(capsys.readouterr().out) == emitted


def test_emit_config_applies_flags(run, capsys):
    assert run("validate", "--emit-config", "--seed", "21", "--samples", "2000") == 0
    emitted = json.loads(capsys.readouterr().out)
    assert emitted["seed"] == 21 and emitted["n_samples"] == 2000


def test_configuration_errors_exit_with_two(run, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    assert run("ptm", "--config", str(broken)) == 2
    assert run("ptm", "--config", str(tmp_path / "absent.json")) == 2
    assert run("ptm", "--config", _write_json(tmp_path, "list.json", [1, 2])) == 2
    bad_field = _write_json(tmp_path, "bad.json", {"channel": {"kind": "c2", "p": 0.4}})
    assert run("ptm", "--config", bad_field) == 2
    assert run("ptm", "--config", bad_field, "--emit-config") == 2
    assert run("distill", "--config", _write_json(tmp_path, "extra.json", {"shots": 3})) == 2


def test_malformed_settings_exit_with_two(tmp_path):
    path = tmp_path / "settings.yaml"
    path.write_text("runtime:\n  threads: -1\n", encoding="utf-8")
    assert main(["--settings", str(path), "ptm"]) == 2


def test_unknown_command_is_rejected(run):
    with pytest.raises(SystemExit):
        run("teleport")


def test_equiv_scan_is_reproducible(run, tmp_path):
    first, second = tmp_path / "scan_a.csv", tmp_path / "scan_b.csv"
    assert run("equiv-scan", "--grid", "4", "--kmax", "2", "--out", str(first)) == 0
    assert run("equiv-scan", "--grid", "4", "--kmax", "2", "--out", str(second)) == 0
    assert first.read_bytes() == second.read_bytes()

    df = read_csv(first)
    assert list(df.columns) == ["A11", "A22", "A33", "count", "infinite_flag"]
    assert len(df) == 15
    np.testing.assert_allclose(df["A11"] + df["A22"] + df["A33"], 1.0)
    assert (df["count"] >= -1).all() and (df["count"] <= 12).all()
    metadata = read_csv_metadata(first)
    assert metadata["command"] == "equiv-scan"
    assert metadata["config"]["k_max"] == 2


def test_eig_trace_reports_pair_onset(run, tmp_path):
    out = tmp_path / "trace.csv"
    assert run("eig-trace", "--out", str(out)) == 0
    metadata = read_csv_metadata(out)
    assert metadata["pair_onset"] == pytest.approx(0.08)
    df = read_csv(out)
    assert len(df) == 101
    assert df["paired"].iloc[0] == 0 and df["paired"].iloc[-1] == 1


def test_distill_sweep_output(run, tmp_path):
    config = _write_json(tmp_path, "distill.json", {
        "model": "cP", "p_values": [0.0, 0.1], "corr_values": [0.0, 1.0],
    })
    out = tmp_path / "sweep.csv"
    assert run("distill", "--config", config, "--out", str(out)) == 0
    df = read_csv(out)
    assert len(df) == 4
    np.testing.assert_allclose(df["F_n"], 1.0 - 3.0 * df["p"], atol=1e-12)
    assert read_csv_metadata(out)["convention"] == "standard"


def test_distill_xlsx_format(run, tmp_path):
    config = _write_json(tmp_path, "distill.json", {"p_values": [0.05], "corr_values": [0.0]})
    assert run("distill", "--config", config, "--format", "xlsx", "--out", str(tmp_path / "sweep")) == 0
    assert (tmp_path / "sweep.xlsx").exists()


def test_validate_writes_report(run, tmp_path):
    config = _write_json(tmp_path, "validate_config.json", {"suites": ["1q"], "n_samples": 1000, "n_steps": 50})
    out = tmp_path / "validate.json"
    code = run("validate", "--config", config, "--out", str(out), "--report")
    assert code in (0, 1)
    document = json.loads(out.read_text(encoding="utf-8"))
    checks = document["result"]["checks"]
    assert [c["name"] for c in checks][:2] == ["1q_zero", "1q_pure_drift"]
    assert checks[0]["passed"] and checks[1]["passed"]
    assert all(c["z"] == 3.0 for c in checks)
    assert document["result"]["config"]["family_wise"] is False
    assert code == (0 if document["result"]["passed"] else 1)
    assert (tmp_path / "validate.md").exists() and (tmp_path / "validate.html").exists()


def test_default_output_directory(run, tmp_path):
    config = _write_json(tmp_path, "ptm.json", {"channel": {"kind": "isotropic", "a1": 0.2, "corr": -1.0}})
    assert run("ptm", "--config", config) == 0
    assert (tmp_path / "outputs" / "ptm.json").exists()


def test_log_files_are_written_when_enabled(tmp_path):
    path = tmp_path / "settings.yaml"
    path.write_text(yaml.safe_dump({
        "runtime": {"logs_dir": str(tmp_path / "logs"), "output_dir": str(tmp_path / "outputs")},
    }), encoding="utf-8")
    config = _write_json(tmp_path, "ptm.json", {"channel": {"kind": "normal1q"}})
    assert main(["--settings", str(path), "ptm", "--config", config]) == 0
    names = sorted(p.name.split("_")[0] for p in (tmp_path / "logs").iterdir())
    assert names == ["execution", "realtime"]
