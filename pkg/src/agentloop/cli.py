"""Command-line interface: run, bench, replay, validate.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from typing import Any

from .runtime import (
    ConfigError,
    MEMORIES,
    PROVIDERS,
    RuntimeConfig,
    load_config,
    load_fixtures,
    run_bench,
    run_episode,
)


def _config_from(args: argparse.Namespace) -> RuntimeConfig:
    cfg = load_config(args.config) if args.config else RuntimeConfig()
    overrides = {}
    if getattr(args, "provider", None):
        overrides["provider"] = args.provider
    if getattr(args, "memory", None):
        overrides["memory"] = args.memory
    if overrides:
        cfg = replace(cfg, **overrides)
    cfg.validate()
    return cfg


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    catalog, specs = load_fixtures(cfg)
    if args.task:
        matches = [s for s in specs if s.id == args.task]
        if not matches:
            raise ConfigError(f"unknown task {args.task!r}")
        spec = matches[0]
    else:
        spec = specs[0]

    if args.transcript:
        with open(args.transcript, "w", encoding="utf-8") as sink:
            report = run_episode(cfg, spec, catalog=catalog, transcript=sink)
    else:
        report = run_episode(cfg, spec, catalog=catalog)
    print(
        f"task {report.task_spec_id} | reward {report.reward!r} | "
        f"cycles {report.cycles} | decisions {len(report.decisions)} | "
        f"memory +{report.memory_version_delta}"
    )
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    table, _ = run_bench(cfg, out_dir=args.out)
    print(table, end="")
    if args.out:
        print(f"\nwritten: {args.out}/report.json")
    return 0


def _replay_record(obj: Any, line_no: int) -> list[str]:
    if not isinstance(obj, dict):
        raise ConfigError(f"transcript line {line_no}: not an object")
    if "final" in obj:
        final = obj["final"]
        return [
            f"final reward: {final['reward']!r} "
            f"(task {final['task']}, {final['cycles']} cycles, "
            f"{final['decisions']} decisions)"
        ]
    if "cycle" not in obj:
        raise ConfigError(f"transcript line {line_no}: neither a cycle nor a final record")
    lines = [f"cycle {obj['cycle']}"]
    lines.append(f"  event    : {obj['event']['intent']}")
    d = obj["decision"]
    lines.append(f"  decision : {d['chosen']}  (candidates: {d['candidate_count']}, memory v{d['memory_version']})")
    fb = obj["feedback"]
    status = "ok" if fb["success"] else "error"
    outcome_lines = fb["outcome"].splitlines() or [""]
    lines.append(f"  outcome  : {status} | {outcome_lines[0]}")
    lines.extend(f"             {extra}" for extra in outcome_lines[1:])
    return lines


def _cmd_replay(args: argparse.Namespace) -> int:
    try:
        with open(args.transcript, encoding="utf-8") as fh:
            raw_lines = [line for line in fh if line.strip()]
    except OSError as exc:
        raise ConfigError(f"cannot read transcript: {exc}") from exc
    if not raw_lines:
        raise ConfigError("transcript is empty")
    for i, line in enumerate(raw_lines, start=1):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"transcript line {i}: invalid JSON: {exc}") from exc
        try:
            rendered = _replay_record(obj, i)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"transcript line {i}: malformed record ({exc})") from exc
        for out in rendered:
            print(out)
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    if args.config:
        cfg = load_config(args.config)
        print(f"ok: config {args.config}")
    else:
        cfg = RuntimeConfig()
        print("ok: config (defaults)")
    if args.catalog:
        cfg = replace(cfg, catalog_path=args.catalog)
    if args.tasks:
        cfg = replace(cfg, tasks_path=args.tasks)
    catalog, specs = load_fixtures(cfg)
    print(f"ok: catalog ({len(catalog)} products)")
    print(f"ok: tasks ({len(specs)} tasks)")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="agentloop",
        description="Event-driven agent runtime: run episodes against the built-in shop environment.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one episode")
    p_run.add_argument("--config", help="TOML config file")
    p_run.add_argument("--task", help="task id (default: the first task)")
    p_run.add_argument("--provider", choices=PROVIDERS)
    p_run.add_argument("--memory", choices=MEMORIES)
    p_run.add_argument("--transcript", help="write the cycle transcript to this path")

    p_bench = sub.add_parser("bench", help="run every task under each configured method")
    p_bench.add_argument("--config", help="TOML config file")
    p_bench.add_argument("--provider", choices=PROVIDERS)
    p_bench.add_argument("--out", help="directory for report.txt, report.json, and transcripts")

    p_replay = sub.add_parser("replay", help="re-render a transcript as a cycle listing")
    p_replay.add_argument("transcript", help="path to a .ldjson transcript")

    p_validate = sub.add_parser("validate", help="lint config, catalog, and task files")
    p_validate.add_argument("--config", help="TOML config file")
    p_validate.add_argument("--catalog", help="catalog .jsonl to check")
    p_validate.add_argument("--tasks", help="tasks .jsonl to check")

    args = parser.parse_args(argv)
    commands = {
        "run": _cmd_run,
        "bench": _cmd_bench,
        "replay": _cmd_replay,
        "validate": _cmd_validate,
    }
    try:
        return commands[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - boundary: map anything else to exit 2
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
