"""Retrieval-augmented memory: persistent old facts plus short-term session items.

The reference embedding is a deterministic hashing bag-of-tokens: tokenize on
non-alphanumeric boundaries, lowercase, FNV-1a 64-bit hash each token to a
dimension index, accumulate counts, normalize to unit length.  Identical
texts embed identically on every platform, and a cross-language
reimplementation agrees bit for bit.
"""

from __future__ import annotations

import json
import math
import re
import threading
import uuid
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Protocol, Sequence

from . import wire
from .actions import Action, render_action
from .types import (
    Clock,
    Event,
    Feedback,
    SystemClock,
    Timestamp,
    Tracer,
    event_to_dict,
)

_TOKEN_SPLIT = re.compile(r"[^0-9a-zA-Z]+")

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


class EmptyText(ValueError):
    """The text contains no tokens and cannot be embedded."""


class DimensionMismatch(ValueError):
    """Two vectors of different dimensions were compared."""


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash."""
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def tokenize(text: str) -> list[str]:
    return [t.lower() for t in _TOKEN_SPLIT.split(text) if t]


def embed(text: str, dim: int = 256) -> tuple[float, ...]:
    """Deterministic unit-length bag-of-tokens vector."""
    tokens = tokenize(text)
    if not tokens:
        raise EmptyText(f"no tokens in {text!r}")
    vec = [0.0] * dim
    for token in tokens:
        vec[fnv1a64(token.encode("utf-8")) % dim] += 1.0
    norm = math.sqrt(sum(x * x for x in vec))
    return tuple(x / norm for x in vec)


def similarity(u: Sequence[float], v: Sequence[float]) -> float:
    """Cosine similarity in [-1, 1]; zero vectors compare as 0."""
    if len(u) != len(v):
        raise DimensionMismatch(f"{len(u)} != {len(v)}")
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)


class MemoryKind(str, Enum):
    OLD_FACT = "old_fact"
    SHORT_TERM = "short_term"


@dataclass(frozen=True, slots=True)
class MemoryItem:
    id: str
    kind: MemoryKind
    text: str
    embedding: tuple[float, ...]
    stored_at: Timestamp
    session: str


@dataclass(frozen=True, slots=True)
class MemoryContext:
    """Retrieved context conditioning one decision."""

    old_facts: tuple[str, ...]
    short_term: tuple[str, ...]
    version: int


class MemoryStore(Protocol):
    """Abstract store interface; in-process and remote flavors are swappable."""

    def record_event(self, e: Event) -> int: ...
    def record_outcome(self, a: Action, f: Feedback) -> int: ...
    def retrieve(self, e: Event, k_old: int = 4, k_short: int = 8) -> MemoryContext: ...
    @property
    def version(self) -> int: ...


def _event_summary(e: Event) -> str:
    obs = " ".join(e.observations)[:200]
    return f"[{e.source.value}] {e.intent} | obs: {obs}"


def _outcome_summary(a: Action, f: Feedback) -> str:
    return f"{render_action(a)} -> {f.outcome}"


class LocalMemory:
    """In-process reference store.

    Every record_* call appends one short_term item and bumps the version by
    exactly 1.  When short_term grows past its window the oldest items are
    promoted to old_fact rather than dropped.
    """

    def __init__(
        self,
        *,
        dim: int = 256,
        window: int = 32,
        threshold: float = 0.1,
        session: str = "s0",
        clock: Clock | None = None,
        id_factory: Callable[[], str] | None = None,
    ) -> None:
        if window < 1:
            raise ValueError("window must be >= 1")
        self.dim = dim
        self.window = window
        self.threshold = threshold
        self.session = session
        self._clock = clock or SystemClock()
        self._id_factory = id_factory or (lambda: uuid.uuid4().hex)
        self._items: list[MemoryItem] = []
        self._version = 0
        self._lock = threading.Lock()

    @property
    def version(self) -> int:
        return self._version

    def items(self) -> tuple[MemoryItem, ...]:
        with self._lock:
            return tuple(self._items)

    def _embed_or_zero(self, text: str) -> tuple[float, ...]:
        # token-less text cannot be unit-normalized; a zero vector is never
        # retrieved (similarity 0 sits below any positive threshold)
        try:
            return embed(text, self.dim)
        except EmptyText:
            return tuple([0.0] * self.dim)

    def _append(self, text: str) -> int:
        with self._lock:
            self._items.append(
                MemoryItem(
                    id=self._id_factory(),
                    kind=MemoryKind.SHORT_TERM,
                    text=text,
                    embedding=self._embed_or_zero(text),
                    stored_at=Timestamp(self._clock.now_nanos(), 0),
                    session=self.session,
                )
            )
            self._promote_locked()
            self._version += 1
            return self._version

    def _promote_locked(self) -> None:
        short = [i for i in self._items if i.kind is MemoryKind.SHORT_TERM]
        excess = len(short) - self.window
        if excess <= 0:
            return
        short.sort(key=lambda i: (i.stored_at.key(), i.id))
        for old in short[:excess]:
            idx = self._items.index(old)
            self._items[idx] = replace(old, kind=MemoryKind.OLD_FACT)

    def record_event(self, e: Event) -> int:
        return self._append(_event_summary(e))

    def record_outcome(self, a: Action, f: Feedback) -> int:
        return self._append(_outcome_summary(a, f))

    def retrieve(self, e: Event, k_old: int = 4, k_short: int = 8) -> MemoryContext:
        query = e.intent + " " + " ".join(e.observations)
        try:
            q = embed(query, self.dim)
        except EmptyText:
            with self._lock:
                return MemoryContext((), (), self._version)
        with self._lock:
            scored = [(similarity(q, item.embedding), item) for item in self._items]
            # score desc, then recency (newer first), then id
            scored = [(s, item) for s, item in scored if s > self.threshold]
            scored.sort(
                key=lambda pair: (
                    -pair[0],
                    -pair[1].stored_at.wall_nanos,
                    -pair[1].stored_at.seq,
                    pair[1].id,
                )
            )
            old = [item.text for s, item in scored if item.kind is MemoryKind.OLD_FACT]
            short = [item.text for s, item in scored if item.kind is MemoryKind.SHORT_TERM]
            return MemoryContext(tuple(old[:k_old]), tuple(short[:k_short]), self._version)

    # ─── snapshot persistence ───

    def save(self, path: str) -> None:
        """Write a line-delimited JSON snapshot (header line, then items)."""
        with self._lock, open(path, "w", encoding="utf-8") as fh:
            header = {"version": self._version, "dim": self.dim, "window": self.window}
            fh.write(json.dumps(header, sort_keys=True) + "\n")
            for item in self._items:
                fh.write(
                    json.dumps(
                        {
                            "id": item.id,
                            "kind": item.kind.value,
                            "text": item.text,
                            "stored_at": {"wall_nanos": item.stored_at.wall_nanos, "seq": item.stored_at.seq},
                            "session": item.session,
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )

    def load(self, path: str) -> None:
        """Reload a snapshot, recomputing embeddings deterministically."""
        with open(path, encoding="utf-8") as fh:
            header = json.loads(fh.readline())
            items = [json.loads(line) for line in fh if line.strip()]
        with self._lock:
            self._version = header["version"]
            self._items = [
                MemoryItem(
                    id=rec["id"],
                    kind=MemoryKind(rec["kind"]),
                    text=rec["text"],
                    embedding=self._embed_or_zero(rec["text"]),
                    stored_at=Timestamp(rec["stored_at"]["wall_nanos"], rec["stored_at"]["seq"]),
                    session=rec["session"],
                )
                for rec in items
            ]


class RemoteMemory:
    """Client for a remote memory service exposing the same store interface.

    Retrieval POSTs the serialized event to ``{base_url}/context`` and maps
    the reply onto MemoryContext.  Writes POST to ``{base_url}/record`` and
    carry back the new version.  With fallback enabled, failures degrade to
    an empty context (reads) or an unchanged version (writes), traced.
    """

    def __init__(
        self,
        base_url: str,
        *,
        timeout: float = 5.0,
        fallback: bool = True,
        tracer: Tracer | None = None,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.fallback = fallback
        self._tracer = tracer
        self._version = 0

    @property
    def version(self) -> int:
        return self._version

    def _trace(self, record: dict) -> None:
        if self._tracer is not None:
            self._tracer.emit(record)

    def fetch_context(self, e: Event) -> MemoryContext:
        try:
            reply = wire.post_json(f"{self.base_url}/context", event_to_dict(e), timeout=self.timeout)
            old = reply["old_facts"]
            short = reply["short_term"]
            version = reply["version"]
            if (
                not isinstance(old, list)
                or not isinstance(short, list)
                or not isinstance(version, int)
                or any(not isinstance(t, str) for t in old + short)
            ):
                raise wire.MalformedReply("context reply fields have wrong types")
        except (KeyError, TypeError) as exc:
            exc = wire.MalformedReply(f"context reply missing fields: {exc}")
            if not self.fallback:
                raise exc from None
            self._trace({"type": "memory_fallback", "reason": str(exc)})
            return MemoryContext((), (), self._version)
        except wire.WireError as exc:
            if not self.fallback:
                raise
            self._trace({"type": "memory_fallback", "reason": str(exc)})
            return MemoryContext((), (), self._version)
        self._version = version
        return MemoryContext(tuple(old), tuple(short), version)

    def retrieve(self, e: Event, k_old: int = 4, k_short: int = 8) -> MemoryContext:
        ctx = self.fetch_context(e)
        return MemoryContext(ctx.old_facts[:k_old], ctx.short_term[:k_short], ctx.version)

    def _record(self, payload: dict) -> int:
        try:
            reply = wire.post_json(f"{self.base_url}/record", payload, timeout=self.timeout)
            version = reply["version"]
            if not isinstance(version, int):
                raise wire.MalformedReply("record reply version is not an integer")
        except (KeyError, TypeError) as exc:
            exc = wire.MalformedReply(f"record reply missing fields: {exc}")
            if not self.fallback:
                raise exc from None
            self._trace({"type": "memory_fallback", "reason": str(exc)})
            return self._version
        except wire.WireError as exc:
            if not self.fallback:
                raise
            self._trace({"type": "memory_fallback", "reason": str(exc)})
            return self._version
        self._version = version
        return version

    def record_event(self, e: Event) -> int:
        return self._record({"kind": "event", "event": event_to_dict(e)})

    def record_outcome(self, a: Action, f: Feedback) -> int:
        return self._record(
            {
                "kind": "outcome",
                "action": render_action(a),
                "outcome": f.outcome,
                "success": f.success,
            }
        )


__all__ = [
    "DimensionMismatch",
    "EmptyText",
    "LocalMemory",
    "MemoryContext",
    "MemoryItem",
    "MemoryKind",
    "MemoryStore",
    "RemoteMemory",
    "embed",
    "fnv1a64",
    "similarity",
    "tokenize",
]
