"""CLI tests: every subcommand end to end plus the error-path exit codes."""
import json
import subprocess
import sys

import pytest

from myoloop.bench import available_backends, format_bench, run_bench
from myoloop.cli import main


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


SMALL_STUDY = {
    "arms": ["CLCC"],
    "seeds_per_arm": 2,
    "trials": 2,
    "training_trials": 0,
    "trial_duration": 1.0,
    "battery": [["position", ["II"]]],
}


class TestCalibrate:
    def test_writes_reference_file(self, tmp_path, capsys):
        out = tmp_path / "refs.json"
        code, stdout, _ = run_cli(["calibrate", "--seed", "3",
                                   "--out", str(out)], capsys)
        assert code == 0
        assert "saved" in stdout and "threshold" in stdout
        doc = json.loads(out.read_text())
        assert doc["v"] == 1
        assert doc["threshold"] > 0
        dofs = {r["dof"] for r in doc["references"]}
        assert dofs == {"I", "II", "III", "REST"}

    def test_saved_references_drive_a_session(self, tmp_path, capsys):
        refs = tmp_path / "refs.json"
        assert main(["calibrate", "--seed", "3", "--out", str(refs)]) == 0
        cfg = tmp_path / "session.json"
        cfg.write_text(json.dumps({"seed": 3, "references": str(refs)}))
        code, stdout, _ = run_cli(["trial", "--config", str(cfg),
                                   "--duration", "1.0"], capsys)
        assert code == 0
        assert "trial MAE:" in stdout


class TestTrial:
    def test_trace_written_with_weights(self, tmp_path, capsys):
        out = tmp_path / "trace.jsonl"
        code, stdout, _ = run_cli(
            ["trial", "--mode", "continuous", "--dof", "II",
             "--seed", "0", "--out", str(out)], capsys)
        assert code == 0
        assert "trial MAE:" in stdout and "%" in stdout
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        assert len(rows) == 100  # 5 s at 20 Hz
        first = rows[0]
        assert first["v"] == 1
        assert len(first["weights"]) == 3
        assert set(first["percept"]) == {"II"}

    def test_discrete_dual_dof(self, capsys):
        code, stdout, _ = run_cli(
            ["trial", "--mode", "discrete", "--dof", "I", "--dof", "II",
             "--target", "0.8", "--duration", "1.0", "--seed", "1"], capsys)
        assert code == 0
        assert "trial MAE:" in stdout

    def test_force_kind(self, capsys):
        code, stdout, _ = run_cli(
            ["trial", "--kind", "force", "--dof", "I", "--target", "0.5",
             "--duration", "1.0", "--seed", "2"], capsys)
        assert code == 0

    def test_open_loop_user(self, capsys):
        code, _, _ = run_cli(
            ["trial", "--user", "open", "--dof", "II",
             "--duration", "1.0", "--seed", "0"], capsys)
        assert code == 0

    def test_bad_dof_pair_is_config_error(self, capsys):
        code, _, stderr = run_cli(
            ["trial", "--dof", "I", "--dof", "III", "--duration", "1.0"],
            capsys)
        assert code == 2
        assert "config error" in stderr


class TestStudy:
    def test_small_study_outputs(self, tmp_path, capsys):
        cfg = tmp_path / "study.json"
        cfg.write_text(json.dumps(SMALL_STUDY))
        out = tmp_path / "out"
        code, stdout, _ = run_cli(
            ["study", "--config", str(cfg), "--out", str(out)], capsys)
        assert code == 0
        assert (out / "report.json").exists()
        assert (out / "summary.csv").exists()
        printed = json.loads(stdout)
        assert "position:II" in printed["median_mae"]["CLCC"]

    def test_seed_override_is_deterministic(self, tmp_path):
        cfg = tmp_path / "study.json"
        cfg.write_text(json.dumps(SMALL_STUDY))
        reports = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["study", "--config", str(cfg), "--seed", "7",
                         "--out", str(out)]) == 0
            reports.append((out / "report.json").read_bytes())
        assert reports[0] == reports[1]

    def test_missing_config_exits_2(self, tmp_path, capsys):
        code, _, stderr = run_cli(
            ["study", "--config", str(tmp_path / "nope.json")], capsys)
        assert code == 2
        assert "config error" in stderr

    def test_invalid_json_config_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "broken.json"
        cfg.write_text("{not json")
        code, _, stderr = run_cli(["study", "--config", str(cfg)], capsys)
        assert code == 2
        assert "config error" in stderr


class TestReplay:
    def test_roundtrip_from_engine_log(self, tmp_path, capsys):
        from myoloop.service import Engine, SessionConfig

        log_path = tmp_path / "session.jsonl"
        with open(log_path, "w") as fh:
            eng = Engine(SessionConfig(seed=0), log=fh)
            eng.set_activation([0.6, 0.0, 0.0])
            for _ in range(20):
                eng.step()
        code, stdout, _ = run_cli(["replay", str(log_path)], capsys)
        assert code == 0
        assert "replayed 20 steps" in stdout
        assert "reproduced exactly" in stdout

    def test_tampered_log_exits_1(self, tmp_path, capsys):
        from myoloop.service import Engine, SessionConfig

        log_path = tmp_path / "session.jsonl"
        with open(log_path, "w") as fh:
            eng = Engine(SessionConfig(seed=0), log=fh)
            eng.set_activation([0.6, 0.0, 0.0])
            for _ in range(5):
                eng.step()
        rows = [json.loads(line) for line in log_path.read_text().splitlines()]
        rows[2]["feedback"]["tangential"][0] += 0.25
        log_path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        code, _, stderr = run_cli(["replay", str(log_path)], capsys)
        assert code == 1
        assert "error" in stderr


class TestBench:
    def test_bench_command(self, capsys):
        code, stdout, _ = run_cli(["bench", "--reps", "3"], capsys)
        assert code == 0
        assert "numpy" in stdout
        assert "ms" in stdout

    def test_run_bench_rows(self):
        rows = run_bench(reps=2, steps=5)
        names = {r["backend"] for r in rows}
        assert "numpy" in names
        assert set(available_backends()) == names
        for r in rows:
            assert r["descend_ms"] > 0
        table = format_bench(rows)
        assert "descend" in table


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        out = tmp_path / "refs.json"
        proc = subprocess.run(
            [sys.executable, "-m", "myoloop.cli", "calibrate",
             "--seed", "1", "--out", str(out)],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert out.exists()

    def test_unknown_flag_exits_2(self):
        proc = subprocess.run(
            [sys.executable, "-m", "myoloop.cli", "trial", "--bogus"],
            capture_output=True, text=True)
        assert proc.returncode == 2
        assert "usage" in proc.stderr

    def test_no_command_exits_2(self):
        proc = subprocess.run(
            [sys.executable, "-m", "myoloop.cli"],
            capture_output=True, text=True)
        assert proc.returncode == 2
