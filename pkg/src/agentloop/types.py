"""Shared domain types: timestamps, events, feedback, clocks, tracing.

Every serialized form in this package is a JSON object with snake_case
field names; actions serialize as their grammar strings.  canonical_json
fixes key order and separators so serialized output is byte-stable.
"""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Mapping, Protocol, TextIO

from .actions import ActionPattern, Action, ParseError, parse_pattern, render_action


class Source(str, Enum):
    """Where a raw input or event originated."""

    SENSOR = "sensor"
    CLIENT = "client"
    TIMER = "timer"
    FEEDBACK = "feedback"


@dataclass(frozen=True, slots=True, order=True)
class Timestamp:
    """Wall-clock nanoseconds paired with an admission sequence number.

    Ordering is lexicographic on (wall_nanos, seq); seq is assigned at
    queue admission and breaks wall-clock ties deterministically.
    """

    wall_nanos: int
    seq: int = 0

    def key(self) -> tuple[int, int]:
        return (self.wall_nanos, self.seq)


@dataclass(frozen=True, slots=True)
class Event:
    """Structured unit of change or intent driving the control loop."""

    id: str
    ts: Timestamp
    source: Source
    intent: str
    instruction: str = ""
    observations: tuple[str, ...] = ()
    available_actions: tuple[ActionPattern, ...] = ()
    context: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True, slots=True)
class Feedback:
    """Outcome of one executed action; every execution produces exactly one."""

    action: Action
    outcome: str
    success: bool
    emitted_at: Timestamp


class SchemaError(ValueError):
    """A decoded message failed event validation."""

    def __init__(self, field_name: str, reason: str) -> None:
        super().__init__(f"{field_name}: {reason}")
        self.field = field_name
        self.reason = reason


# ─── clocks ───


class Clock(Protocol):
    def now_nanos(self) -> int: ...


class SystemClock:
    """Real wall-clock time."""

    def now_nanos(self) -> int:
        return time.time_ns()


class SimClock:
    """Deterministic clock: each reading advances by a fixed step."""

    def __init__(self, start_nanos: int = 0, step_nanos: int = 1_000_000) -> None:
        self._next = start_nanos
        self._step = step_nanos

    def now_nanos(self) -> int:
        t = self._next
        self._next += self._step
        return t


def make_counter(prefix: str) -> Callable[[], str]:
    """Deterministic id factory: prefix1, prefix2, ..."""
    n = 0

    def next_id() -> str:
        nonlocal n
        n += 1
        return f"{prefix}{n}"

    return next_id


# ─── canonical JSON ───


def canonical_json(obj: Any) -> str:
    """Byte-stable JSON: sorted keys, compact separators, raw UTF-8."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def ts_to_dict(ts: Timestamp) -> dict[str, int]:
    return {"wall_nanos": ts.wall_nanos, "seq": ts.seq}


def event_to_dict(e: Event) -> dict[str, Any]:
    return {
        "id": e.id,
        "ts": ts_to_dict(e.ts),
        "source": e.source.value,
        "intent": e.intent,
        "instruction": e.instruction,
        "observations": list(e.observations),
        "available_actions": [str(p) for p in e.available_actions],
        "context": dict(e.context),
    }


def feedback_to_dict(f: Feedback) -> dict[str, Any]:
    return {
        "action": render_action(f.action),
        "outcome": f.outcome,
        "success": f.success,
        "emitted_at": ts_to_dict(f.emitted_at),
    }


# ─── validation ───


def _require_str(raw: Mapping[str, Any], key: str, *, default: str | None = None) -> str:
    v = raw.get(key, default)
    if not isinstance(v, str):
        raise SchemaError(key, "must be a string")
    return v


def validate_event(
    raw: Mapping[str, Any],
    *,
    default_source: Source = Source.CLIENT,
    id_factory: Callable[[], str] | None = None,
    wall_nanos: int | None = None,
) -> Event:
    """Build a well-formed Event from a decoded message.

    Fills id and ts when missing; never mutates other caller-supplied
    fields.  Raises SchemaError on any malformed field.
    """
    if not isinstance(raw, Mapping):
        raise SchemaError("event", "not an object")

    intent = raw.get("intent")
    if not isinstance(intent, str) or not intent:
        raise SchemaError("intent", "required")

    if "id" in raw:
        event_id = raw["id"]
        if not isinstance(event_id, str) or not event_id:
            raise SchemaError("id", "must be a non-empty string")
    else:
        event_id = id_factory() if id_factory is not None else uuid.uuid4().hex

    if "ts" in raw:
        ts_raw = raw["ts"]
        if (
            not isinstance(ts_raw, Mapping)
            or not isinstance(ts_raw.get("wall_nanos"), int)
            or not isinstance(ts_raw.get("seq"), int)
            or isinstance(ts_raw.get("wall_nanos"), bool)
            or isinstance(ts_raw.get("seq"), bool)
        ):
            raise SchemaError("ts", "must carry integer wall_nanos and seq")
        ts = Timestamp(ts_raw["wall_nanos"], ts_raw["seq"])
    else:
        ts = Timestamp(wall_nanos if wall_nanos is not None else time.time_ns(), 0)

    if "source" in raw:
        try:
            source = Source(raw["source"])
        except ValueError:
            raise SchemaError("source", f"unknown source {raw['source']!r}") from None
    else:
        source = default_source

    instruction = _require_str(raw, "instruction", default="")

    obs_raw = raw.get("observations", [])
    if not isinstance(obs_raw, (list, tuple)) or any(not isinstance(o, str) for o in obs_raw):
        raise SchemaError("observations", "must be a list of strings")

    aa_raw = raw.get("available_actions", [])
    if not isinstance(aa_raw, (list, tuple)):
        raise SchemaError("available_actions", "must be a list of action patterns")
    patterns: list[ActionPattern] = []
    for i, entry in enumerate(aa_raw):
        if not isinstance(entry, str):
            raise SchemaError("available_actions", f"entry {i}: must be a string")
        try:
            patterns.append(parse_pattern(entry))
        except ParseError as exc:
            raise SchemaError("available_actions", f"entry {i}: {exc.reason}") from None

    ctx_raw = raw.get("context", {})
    if not isinstance(ctx_raw, Mapping) or any(
        not isinstance(k, str) or not isinstance(v, str) for k, v in ctx_raw.items()
    ):
        raise SchemaError("context", "must map strings to strings")

    return Event(
        id=event_id,
        ts=ts,
        source=source,
        intent=intent,
        instruction=instruction,
        observations=tuple(obs_raw),
        available_actions=tuple(patterns),
        context=dict(ctx_raw),
    )


# ─── tracing ───


class Tracer:
    """Collects structured trace records, mirroring them to a sink as JSON lines."""

    def __init__(self, sink: TextIO | None = None) -> None:
        self.records: list[dict[str, Any]] = []
        self._sink = sink

    def emit(self, record: Mapping[str, Any]) -> None:
        rec = dict(record)
        self.records.append(rec)
        if self._sink is not None:
            self._sink.write(canonical_json(rec) + "\n")

    def of_type(self, record_type: str) -> list[dict[str, Any]]:
        return [r for r in self.records if r.get("type") == record_type]


__all__ = [
    "Clock",
    "Event",
    "Feedback",
    "SchemaError",
    "SimClock",
    "Source",
    "SystemClock",
    "Timestamp",
    "Tracer",
    "canonical_json",
    "event_to_dict",
    "feedback_to_dict",
    "make_counter",
    "ts_to_dict",
    "validate_event",
]
