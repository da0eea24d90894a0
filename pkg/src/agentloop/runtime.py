"""Episode orchestration: configuration, the ingest/decide/execute loop, and benchmarks.

One cycle pops the newest live event, decides, executes, and feeds the outcome
straight back in as a new raw input, so the next cycle always sees the latest
consequence of the last action.  Every episode ends with a refresh audit: the
memory version must have moved by exactly one per generated event plus one per
executed action, or the episode is rejected outright.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, fields
from typing import Any, Callable, Sequence, TextIO

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .actions import render_action
from .decision import Decision, DecisionEngine
from .effectors import ShopEffector, describe_step, feedback_to_input
from .memory import LocalMemory, MemoryStore, RemoteMemory
from .pipeline import EventGenerator, EventQueue, RawInput
from .players import OptimalShopPlayer, SingleShotPlayer
from .providers import Provider, RemoteProvider
from .shopsim import (
    Product,
    ShopSim,
    TaskSpec,
    default_catalog,
    default_tasks,
    load_catalog,
    load_tasks,
)
from .tasks import TaskKind, TaskManager, TaskState
from .types import (
    Clock,
    Event,
    SimClock,
    Source,
    SystemClock,
    Timestamp,
    Tracer,
    canonical_json,
    event_to_dict,
    feedback_to_dict,
    make_counter,
    ts_to_dict,
)


class ConfigError(ValueError):
    """The runtime configuration (or a config/fixture file) is unusable."""


class AuditError(RuntimeError):
    """The episode violated the memory refresh contract."""


PROVIDERS = ("scripted", "remote")
MEMORIES = ("local", "remote")


@dataclass(frozen=True, slots=True)
class RuntimeConfig:
    """Everything an episode needs, file-loadable and override-friendly.

    The seed only shuffles task order in batch runs; episode behavior is
    pinned by the deterministic clock and id counters.
    """

    queue_capacity: int = 256
    queue_ttl_seconds: float = 60.0
    candidate_cap: int = 5
    k_max: int = 8
    k_old: int = 4
    k_short: int = 8
    threshold: float = 0.1
    memory_window: int = 32
    provider: str = "scripted"
    base_url: str = ""
    model: str = ""
    timeout: float = 30.0
    memory: str = "local"
    memory_url: str = ""
    catalog_path: str = ""
    tasks_path: str = ""
    step_cap: int = 15
    top_k: int = 5
    noop_cutoff: int = 3
    seed: int = 0
    trace_path: str = ""

    def validate(self) -> None:
        positive_ints = (
            "queue_capacity",
            "k_max",
            "k_old",
            "k_short",
            "memory_window",
            "step_cap",
            "top_k",
            "noop_cutoff",
        )
        for name in positive_ints:
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in ("queue_ttl_seconds", "threshold", "timeout"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        if self.candidate_cap != 5:
            raise ConfigError("candidate_cap is fixed at 5; the dispatch stage indexes at most five candidates")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.provider not in PROVIDERS:
            raise ConfigError(f"provider must be one of {', '.join(PROVIDERS)}")
        if self.memory not in MEMORIES:
            raise ConfigError(f"memory must be one of {', '.join(MEMORIES)}")
        if self.provider == "remote" and (not self.base_url or not self.model):
            raise ConfigError("remote provider requires base_url and model")
        if self.memory == "remote" and not self.memory_url:
            raise ConfigError("remote memory requires memory_url")


def load_config(path: str) -> RuntimeConfig:
    """Read a flat TOML file holding RuntimeConfig fields; unknown keys fail."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc

    known = {f.name: f.default for f in fields(RuntimeConfig)}
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        expected = type(known[key])
        if expected is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, expected) or isinstance(value, bool):
            raise ConfigError(f"config key {key!r} must be {expected.__name__}")
        kwargs[key] = value
    cfg = RuntimeConfig(**kwargs)
    cfg.validate()
    return cfg


def build_provider(cfg: RuntimeConfig) -> Provider:
    if cfg.provider == "remote":
        return RemoteProvider(cfg.base_url, cfg.model, timeout=cfg.timeout)
    return OptimalShopPlayer()


def build_memory(cfg: RuntimeConfig, clock: Clock, tracer: Tracer | None) -> MemoryStore:
    if cfg.memory == "remote":
        return RemoteMemory(cfg.memory_url, timeout=cfg.timeout, tracer=tracer)
    return LocalMemory(
        window=cfg.memory_window,
        threshold=cfg.threshold,
        clock=clock,
        id_factory=make_counter("m"),
    )


def load_fixtures(cfg: RuntimeConfig) -> tuple[tuple[Product, ...], tuple[TaskSpec, ...]]:
    try:
        catalog = load_catalog(cfg.catalog_path) if cfg.catalog_path else default_catalog()
        tasks = load_tasks(cfg.tasks_path) if cfg.tasks_path else default_tasks()
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if not tasks:
        raise ConfigError("task list is empty")
    return catalog, tasks


# ─── episode reports ───


@dataclass(frozen=True, slots=True)
class EpisodeReport:
    task_spec_id: str
    cycles: int
    decisions: tuple[Decision, ...]
    reward: float
    memory_version_delta: int
    wall_seconds: float


def decision_to_dict(d: Decision) -> dict[str, Any]:
    return {
        "event_id": d.event_id,
        "chosen": render_action(d.chosen),
        "candidate_count": d.candidate_count,
        "memory_version": d.memory_version,
        "decided_at": ts_to_dict(d.decided_at),
    }


def report_to_dict(r: EpisodeReport) -> dict[str, Any]:
    return {
        "task": r.task_spec_id,
        "cycles": r.cycles,
        "decisions": len(r.decisions),
        "reward": r.reward,
        "memory_version_delta": r.memory_version_delta,
        "wall_seconds": r.wall_seconds,
    }


@dataclass(frozen=True, slots=True)
class BatchReport:
    reports: tuple[EpisodeReport, ...]
    mean_reward: float


# ─── the loop ───


def run_episode(
    cfg: RuntimeConfig,
    spec: TaskSpec,
    *,
    provider: Provider | None = None,
    memory: MemoryStore | None = None,
    clock: Clock | None = None,
    catalog: Sequence[Product] | None = None,
    transcript: TextIO | None = None,
    tracer: Tracer | None = None,
) -> EpisodeReport:
    """Run one shop episode to completion and audit the refresh contract.

    The loop pops the newest live event each cycle; executed outcomes are
    re-ingested in the same cycle so the following pop sees them first.
    """
    cfg.validate()
    provider = provider or build_provider(cfg)
    # scripted runs get a stepping clock so ids, timestamps, and wall time
    # are identical on every run and platform
    clock = clock or (SimClock() if cfg.provider == "scripted" else SystemClock())
    memory = memory or build_memory(cfg, clock, tracer)
    if catalog is None:
        catalog, _ = load_fixtures(cfg)

    sim = ShopSim(catalog, spec, step_cap=cfg.step_cap, top_k=cfg.top_k)
    effector = ShopEffector(sim, clock=clock)
    queue = EventQueue(cfg.queue_capacity, cfg.queue_ttl_seconds, tracer)
    tasks = TaskManager(
        noop_cutoff=cfg.noop_cutoff, clock=clock, id_factory=make_counter("t"), tracer=tracer
    )
    generator = EventGenerator(
        provider, clock=clock, id_factory=make_counter("e"), k_max=cfg.k_max, tracer=tracer
    )
    engine = DecisionEngine(
        provider,
        clock=clock,
        tracer=tracer,
        task_context=tasks.active_context,
        k_old=cfg.k_old,
        k_short=cfg.k_short,
    )

    started = clock.now_nanos()
    version_start = memory.version
    events_generated = 0
    actions_executed = 0
    decisions: list[Decision] = []
    admitted: dict[str, Event] = {}
    task_id: str | None = None

    def ingest(raw: RawInput) -> None:
        nonlocal events_generated, task_id
        generated = generator.generate_events(raw)
        for e in generated:
            memory.record_event(e)
            events_generated += 1
            adm = queue.push(e)
            admitted[adm.event.id] = adm.event
        if task_id is None and generated:
            task_id = tasks.spawn_task(spec.instruction, TaskKind.SHORT_TERM, generated[0]).id

    def observe_input() -> RawInput:
        return RawInput(
            Source.SENSOR, describe_step(sim.observe()), Timestamp(clock.now_nanos(), 0)
        )

    ingest(observe_input())

    cycle_cap = 4 * cfg.step_cap + 16
    cycles = 0
    while not sim.done and cycles < cycle_cap:
        cycles += 1
        if len(queue) == 0:
            ingest(observe_input())
        d = engine.select_action(queue, memory, clock.now_nanos())
        if d is None:  # skipped cycle: the event was re-admitted
            continue
        decisions.append(d)
        if task_id is not None:
            active = tasks.get(task_id)
            if active is not None and active.state is TaskState.ACTIVE:
                tasks.note_decision(task_id, d)
        fb = effector.execute(d.chosen)
        actions_executed += 1
        memory.record_outcome(d.chosen, fb)
        if transcript is not None:
            transcript.write(
                canonical_json(
                    {
                        "cycle": cycles,
                        "event": event_to_dict(admitted[d.event_id]),
                        "decision": decision_to_dict(d),
                        "feedback": feedback_to_dict(fb),
                    }
                )
                + "\n"
            )
        ingest(feedback_to_input(fb))

    final = sim.observe()
    final_reward = final.reward if final.reward is not None else 0.0
    if task_id is not None:
        active = tasks.get(task_id)
        if active is not None and active.state is TaskState.ACTIVE:
            if final_reward > 0:
                tasks.complete_task(task_id)
            else:
                tasks.fail_task(task_id)
    tasks.sweep_episode()

    delta = memory.version - version_start
    if delta != events_generated + actions_executed:
        raise AuditError(
            f"memory version moved by {delta}, expected "
            f"{events_generated} events + {actions_executed} actions"
        )

    report = EpisodeReport(
        task_spec_id=spec.id,
        cycles=cycles,
        decisions=tuple(decisions),
        reward=final_reward,
        memory_version_delta=delta,
        wall_seconds=(clock.now_nanos() - started) / 1e9,
    )
    if transcript is not None:
        transcript.write(canonical_json({"final": report_to_dict(report)}) + "\n")
    return report


def run_batch(
    cfg: RuntimeConfig,
    specs: Sequence[TaskSpec],
    *,
    provider_factory: Callable[[], Provider] | None = None,
    catalog: Sequence[Product] | None = None,
    transcript_dir: str | None = None,
    tracer: Tracer | None = None,
) -> BatchReport:
    """Run every spec as one episode, in seed-shuffled order.

    Each episode gets a fresh provider (scripted players carry state), a
    fresh memory, and a fresh clock.
    """
    cfg.validate()
    if not specs:
        raise ConfigError("task list is empty")
    if catalog is None:
        catalog, _ = load_fixtures(cfg)
    factory = provider_factory or (lambda: build_provider(cfg))

    order = list(specs)
    random.Random(cfg.seed).shuffle(order)

    reports: list[EpisodeReport] = []
    for spec in order:
        if transcript_dir is not None:
            with open(f"{transcript_dir}/{spec.id}.ldjson", "w", encoding="utf-8") as sink:
                reports.append(
                    run_episode(
                        cfg, spec, provider=factory(), catalog=catalog, transcript=sink, tracer=tracer
                    )
                )
        else:
            reports.append(
                run_episode(cfg, spec, provider=factory(), catalog=catalog, tracer=tracer)
            )
    mean = sum(r.reward for r in reports) / len(reports)
    return BatchReport(tuple(reports), mean)


# ─── bench ───


def _bench_methods(cfg: RuntimeConfig) -> list[tuple[str, Callable[[], Provider]]]:
    if cfg.provider == "remote":
        return [("remote model", lambda: build_provider(cfg))]
    # baseline first: a planner that commits to a fixed action sequence at
    # reset and ignores everything the environment says afterwards
    return [
        ("single-shot baseline", SingleShotPlayer),
        ("event-driven loop", OptimalShopPlayer),
    ]


def _slug(label: str) -> str:
    return label.replace(" ", "_")


def render_bench_table(rows: list[tuple[str, BatchReport]]) -> str:
    """Aligned two-column summary plus a per-task reward matrix."""
    label_w = max(len("Agent Configuration"), *(len(label) for label, _ in rows))
    lines = [f"{'Agent Configuration':<{label_w}}  {'Average Reward':>14}"]
    lines.append("-" * (label_w + 16))
    for label, batch in rows:
        lines.append(f"{label:<{label_w}}  {batch.mean_reward:>14.2f}")

    lines.append("")
    task_ids = [r.task_spec_id for r in rows[0][1].reports]
    task_w = max(len("task"), *(len(t) for t in task_ids))
    header = f"{'task':<{task_w}}" + "".join(f"  {label:>{max(len(label), 6)}}" for label, _ in rows)
    lines.append(header)
    by_label = {
        label: {r.task_spec_id: r.reward for r in batch.reports} for label, batch in rows
    }
    for task in task_ids:
        cells = "".join(
            f"  {by_label[label][task]:>{max(len(label), 6)}.2f}" for label, _ in rows
        )
        lines.append(f"{task:<{task_w}}" + cells)
    return "\n".join(lines) + "\n"


def run_bench(cfg: RuntimeConfig, *, out_dir: str | None = None) -> tuple[str, dict[str, Any]]:
    """Run the benchmark for every configured method; returns (table, report).

    With out_dir set, writes report.txt, report.json, and per-method
    transcript directories underneath it.
    """
    cfg.validate()
    catalog, specs = load_fixtures(cfg)
    rows: list[tuple[str, BatchReport]] = []
    for label, factory in _bench_methods(cfg):
        tdir = None
        if out_dir is not None:
            tdir = os.path.join(out_dir, "transcripts", _slug(label))
            os.makedirs(tdir, exist_ok=True)
        rows.append(
            (
                label,
                run_batch(
                    cfg, specs, provider_factory=factory, catalog=catalog, transcript_dir=tdir
                ),
            )
        )

    table = render_bench_table(rows)
    report = {
        "seed": cfg.seed,
        "methods": [
            {
                "label": label,
                "mean_reward": batch.mean_reward,
                "episodes": [report_to_dict(r) for r in batch.reports],
            }
            for label, batch in rows
        ],
    }
    if out_dir is not None:
        with open(os.path.join(out_dir, "report.txt"), "w", encoding="utf-8") as fh:
            fh.write(table)
        with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
            fh.write(canonical_json(report) + "\n")
    return table, report


__all__ = [
    "AuditError",
    "BatchReport",
    "ConfigError",
    "EpisodeReport",
    "RuntimeConfig",
    "build_memory",
    "build_provider",
    "decision_to_dict",
    "load_config",
    "load_fixtures",
    "render_bench_table",
    "report_to_dict",
    "run_batch",
    "run_bench",
    "run_episode",
]
