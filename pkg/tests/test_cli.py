"""CLI contract: subcommands, exit codes, and output shapes."""

import json

import pytest

from agentloop.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ─── run ───


class TestRun:
    def test_default_task_wins(self, capsys):
        code, out, err = run_cli(capsys, "run")
        assert code == 0
        assert "task t01" in out and "reward 1.0" in out
        assert err == ""

    def test_named_task(self, capsys):
        code, out, _ = run_cli(capsys, "run", "--task", "t05")
        assert code == 0
        assert "task t05" in out

    def test_unknown_task_is_a_config_error(self, capsys):
        code, out, err = run_cli(capsys, "run", "--task", "t99")
        assert code == 1
        assert "config error" in err and "t99" in err
        assert out == ""

    def test_missing_config_file(self, capsys):
        code, _, err = run_cli(capsys, "run", "--config", "/no/such/file.toml")
        assert code == 1
        assert "config error" in err

    def test_config_file_is_honored(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text("step_cap = 2\n")
        code, out, _ = run_cli(capsys, "run", "--config", str(cfg), "--task", "t01")
        assert code == 0
        # two steps are not enough to buy anything
        assert "reward 0.0" in out

    def test_transcript_written(self, capsys, tmp_path):
        path = tmp_path / "t01.ldjson"
        code, _, _ = run_cli(capsys, "run", "--transcript", str(path))
        assert code == 0
        lines = [json.loads(l) for l in path.read_text().splitlines()]
        assert lines[0]["cycle"] == 1
        assert lines[-1]["final"]["reward"] == 1.0

    def test_unwritable_transcript_is_a_runtime_failure(self, capsys):
        code, _, err = run_cli(capsys, "run", "--transcript", "/no/such/dir/x.ldjson")
        assert code == 2
        assert "runtime failure" in err

    def test_bad_provider_flag_exits_via_argparse(self, capsys):
        with pytest.raises(SystemExit):
            main(["run", "--provider", "psychic"])


# ─── bench ───


class TestBench:
    def test_prints_table(self, capsys):
        code, out, _ = run_cli(capsys, "bench")
        assert code == 0
        assert "Agent Configuration" in out
        assert "event-driven loop" in out
        assert "1.00" in out and "0.00" in out

    def test_out_dir_round_trip_is_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run_cli(capsys, "bench", "--out", str(a))[0] == 0
        assert run_cli(capsys, "bench", "--out", str(b))[0] == 0
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
        assert (a / "report.txt").read_bytes() == (b / "report.txt").read_bytes()
        ta = (a / "transcripts" / "event-driven_loop" / "t01.ldjson").read_bytes()
        tb = (b / "transcripts" / "event-driven_loop" / "t01.ldjson").read_bytes()
        assert ta == tb


# ─── replay ───


class TestReplay:
    def test_renders_cycle_listing(self, capsys, tmp_path):
        path = tmp_path / "t01.ldjson"
        run_cli(capsys, "run", "--transcript", str(path))
        code, out, _ = run_cli(capsys, "replay", str(path))
        assert code == 0
        assert out.startswith("cycle 1\n")
        assert "decision : " in out
        assert "outcome  : ok" in out
        assert out.rstrip().splitlines()[-1].startswith("final reward: 1.0")

    def test_missing_transcript(self, capsys):
        code, _, err = run_cli(capsys, "replay", "/no/such/transcript.ldjson")
        assert code == 1
        assert "config error" in err

    def test_malformed_line(self, capsys, tmp_path):
        path = tmp_path / "junk.ldjson"
        path.write_text('{"cycle": 1}\nnot json\n')
        code, _, err = run_cli(capsys, "replay", str(path))
        assert code == 1

    def test_empty_transcript(self, capsys, tmp_path):
        path = tmp_path / "empty.ldjson"
        path.write_text("")
        code, _, err = run_cli(capsys, "replay", str(path))
        assert code == 1
        assert "empty" in err


# ─── validate ───


class TestValidate:
    def test_defaults_pass(self, capsys):
        code, out, _ = run_cli(capsys, "validate")
        assert code == 0
        assert out.splitlines() == [
            "ok: config (defaults)",
            "ok: catalog (12 products)",
            "ok: tasks (10 tasks)",
        ]

    def test_custom_config(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text("seed = 3\n")
        code, out, _ = run_cli(capsys, "validate", "--config", str(cfg))
        assert code == 0
        assert f"ok: config {cfg}" in out

    def test_broken_tasks_file(self, capsys, tmp_path):
        bad = tmp_path / "tasks.jsonl"
        bad.write_text('{"id": "x1"}\n')
        code, out, err = run_cli(capsys, "validate", "--tasks", str(bad))
        assert code == 1
        assert "config error" in err
        assert "ok: config (defaults)" in out  # config was checked first

    def test_broken_catalog_file(self, capsys, tmp_path):
        bad = tmp_path / "catalog.jsonl"
        bad.write_text("{not json}\n")
        code, _, err = run_cli(capsys, "validate", "--catalog", str(bad))
        assert code == 1

    def test_bad_config_values(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text("candidate_cap = 7\n")
        code, _, err = run_cli(capsys, "validate", "--config", str(cfg))
        assert code == 1
        assert "candidate_cap" in err


class TestParser:
    def test_no_command_exits(self):
        with pytest.raises(SystemExit):
            main([])

    def test_unknown_command_exits(self):
        with pytest.raises(SystemExit):
            main(["conquer"])
