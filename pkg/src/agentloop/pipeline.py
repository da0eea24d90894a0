"""Event pipeline: the temporally ordered queue, input sources, and the event generator.

Producers push and never block on the consumer; the queue evicts its oldest
event on overflow and expires events that outlive their ttl, so the system
stays live under a paused consumer.
"""

from __future__ import annotations

import itertools
import json
import threading
import uuid
from dataclasses import dataclass, replace
from typing import Callable

from .prompts import load_prompt, render_event_request
from .providers import Provider, ProviderError, request
from .types import (
    Clock,
    Event,
    SchemaError,
    Source,
    SystemClock,
    Timestamp,
    Tracer,
    validate_event,
)


@dataclass(frozen=True, slots=True)
class RawInput:
    """Unstructured input awaiting event generation."""

    source: Source
    payload: str
    received_at: Timestamp

    def __post_init__(self) -> None:
        if not self.payload:
            raise ValueError("payload must be non-empty")


@dataclass(frozen=True, slots=True)
class Admission:
    """Result of pushing one event: the event as admitted, plus any eviction."""

    event: Event
    evicted: Event | None = None


class EventQueue:
    """Buffers admitted events in (wall_nanos, seq) order.

    Supports many concurrent producers and one logical consumer; push and
    pop_latest are atomic with respect to each other.
    """

    def __init__(
        self,
        capacity: int = 256,
        ttl_seconds: float = 60.0,
        tracer: Tracer | None = None,
    ) -> None:
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        if ttl_seconds <= 0:
            raise ValueError("ttl_seconds must be > 0")
        self.capacity = capacity
        self._ttl_nanos = int(ttl_seconds * 1_000_000_000)
        self._tracer = tracer
        self._items: list[Event] = []
        self._lock = threading.Lock()
        self._seq = itertools.count(1)

    def __len__(self) -> int:
        with self._lock:
            return len(self._items)

    def _trace(self, record: dict) -> None:
        if self._tracer is not None:
            self._tracer.emit(record)

    def _evict_locked(self) -> Event | None:
        if len(self._items) <= self.capacity:
            return None
        victim = min(self._items, key=lambda e: e.ts.key())
        self._items.remove(victim)
        self._trace({"type": "evict", "event_id": victim.id})
        return victim

    def _expire_locked(self, now_nanos: int) -> None:
        live: list[Event] = []
        for e in self._items:
            if now_nanos - e.ts.wall_nanos > self._ttl_nanos:
                self._trace({"type": "expire", "event_id": e.id})
            else:
                live.append(e)
        self._items = live

    def push(self, e: Event) -> Admission:
        """Admit an event with a fresh seq; always succeeds (drop-oldest)."""
        with self._lock:
            stamped = replace(e, ts=Timestamp(e.ts.wall_nanos, next(self._seq)))
            self._items.append(stamped)
            return Admission(stamped, self._evict_locked())

    def readmit(self, e: Event) -> Admission:
        """Re-queue an already admitted event at its original timestamp."""
        with self._lock:
            self._items.append(e)
            return Admission(e, self._evict_locked())

    def pop_latest(self, now_nanos: int) -> Event | None:
        """Remove and return the live event with the maximum (wall_nanos, seq)."""
        with self._lock:
            self._expire_locked(now_nanos)
            if not self._items:
                return None
            victim = max(self._items, key=lambda e: e.ts.key())
            self._items.remove(victim)
            return victim

    def live(self, now_nanos: int) -> tuple[Event, ...]:
        """Snapshot of the live events, newest first."""
        with self._lock:
            self._expire_locked(now_nanos)
            return tuple(sorted(self._items, key=lambda e: e.ts.key(), reverse=True))


class TimerSource:
    """Emits timer raw inputs at a fixed interval on a background thread."""

    def __init__(
        self,
        interval_seconds: float,
        emit: Callable[[RawInput], None],
        clock: Clock | None = None,
    ) -> None:
        if interval_seconds <= 0:
            raise ValueError("interval_seconds must be > 0")
        self._interval = interval_seconds
        self._emit = emit
        self._clock = clock or SystemClock()
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def start(self) -> None:
        if self._thread is not None:
            raise RuntimeError("timer already started")
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def _run(self) -> None:
        n = 0
        while not self._stop.wait(self._interval):
            n += 1
            self._emit(
                RawInput(Source.TIMER, f"timer tick {n}", Timestamp(self._clock.now_nanos(), 0))
            )

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join()
            self._thread = None


class EventGenerator:
    """Turns raw inputs into schema-validated Events via a reasoning provider.

    Malformed provider items are dropped with a trace record; when nothing
    usable comes back (or the provider fails) a single fallback event is
    emitted whose intent is the raw payload verbatim, unless fallback is
    disabled, in which case the failure propagates as ProviderError.
    """

    def __init__(
        self,
        provider: Provider,
        *,
        clock: Clock | None = None,
        id_factory: Callable[[], str] | None = None,
        k_max: int = 8,
        fallback: bool = True,
        tracer: Tracer | None = None,
    ) -> None:
        if k_max < 1:
            raise ValueError("k_max must be >= 1")
        self._provider = provider
        self._clock = clock or SystemClock()
        self._id_factory = id_factory or (lambda: uuid.uuid4().hex)
        self._k_max = k_max
        self._fallback = fallback
        self._tracer = tracer
        self._system = load_prompt("event_generator")

    def _trace(self, record: dict) -> None:
        if self._tracer is not None:
            self._tracer.emit(record)

    def _fallback_event(self, raw: RawInput, reason: str) -> Event:
        self._trace({"type": "generator_fallback", "reason": reason})
        return Event(
            id=self._id_factory(),
            ts=Timestamp(self._clock.now_nanos(), 0),
            source=raw.source,
            intent=raw.payload,
        )

    def generate_events(self, raw: RawInput) -> list[Event]:
        try:
            reply = self._provider.complete(request(self._system, render_event_request(raw)))
        except ProviderError as exc:
            if not self._fallback:
                raise
            return [self._fallback_event(raw, f"provider failed: {exc}")]

        try:
            items = json.loads(reply.content)
            if not isinstance(items, list):
                raise ValueError("reply is not a JSON array")
        except ValueError as exc:
            if not self._fallback:
                raise ProviderError(f"unparseable generator reply: {exc}") from exc
            return [self._fallback_event(raw, f"unparseable reply: {exc}")]

        events: list[Event] = []
        for i, item in enumerate(items):
            if len(events) >= self._k_max:
                self._trace({"type": "generator_truncated", "dropped": len(items) - i})
                break
            try:
                events.append(
                    validate_event(
                        item,
                        default_source=raw.source,
                        id_factory=self._id_factory,
                        wall_nanos=self._clock.now_nanos(),
                    )
                )
            except SchemaError as exc:
                self._trace({"type": "drop_invalid_event", "index": i, "reason": str(exc)})

        if not events:
            if not self._fallback:
                raise ProviderError("every generated event was malformed")
            return [self._fallback_event(raw, "every generated event was malformed")]
        return events


__all__ = [
    "Admission",
    "EventGenerator",
    "EventQueue",
    "RawInput",
    "TimerSource",
]
