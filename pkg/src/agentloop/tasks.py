"""Persistent task set: goals spawned from events, with a simple lifecycle.

Tasks move along active -> {completed, failed, expired} and never leave a
terminal state.  A run of consecutive noop decisions (default 3) fails the
task: repeated "no meaningful progress" is treated as giving up on the goal.
Short-term tasks that are still active when an episode ends are expired by
the sweep; long-term tasks survive it.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .actions import Verb
from .decision import Decision
from .types import Clock, Event, SystemClock, Timestamp, Tracer


class TaskKind(str, Enum):
    SHORT_TERM = "short_term"
    LONG_TERM = "long_term"


class TaskState(str, Enum):
    ACTIVE = "active"
    COMPLETED = "completed"
    FAILED = "failed"
    EXPIRED = "expired"


class DuplicateOrigin(ValueError):
    """An active task already exists for this origin event."""


class NotActive(ValueError):
    """The operation requires an active task."""


@dataclass(slots=True)
class Task:
    id: str
    goal: str
    kind: TaskKind
    state: TaskState
    created_at: Timestamp
    origin_event: str
    history: list[str] = field(default_factory=list)
    noop_streak: int = 0

    def summary(self) -> str:
        return f"{self.goal} | {self.kind.value} | {len(self.history)} decisions so far"


class TaskManager:
    """Single-writer task registry; snapshots are safe to read concurrently."""

    def __init__(
        self,
        *,
        noop_cutoff: int = 3,
        clock: Clock | None = None,
        id_factory: Callable[[], str] | None = None,
        tracer: Tracer | None = None,
    ) -> None:
        if noop_cutoff < 1:
            raise ValueError("noop_cutoff must be >= 1")
        self.noop_cutoff = noop_cutoff
        self._clock = clock or SystemClock()
        self._id_factory = id_factory or (lambda: uuid.uuid4().hex)
        self._tracer = tracer
        self._tasks: dict[str, Task] = {}
        self._lock = threading.Lock()

    def _trace(self, record: dict) -> None:
        if self._tracer is not None:
            self._tracer.emit(record)

    # ─── lifecycle ───

    def spawn_task(self, goal: str, kind: TaskKind, origin: Event) -> Task:
        if not goal:
            raise ValueError("goal must be non-empty")
        with self._lock:
            for t in self._tasks.values():
                if t.state is TaskState.ACTIVE and t.origin_event == origin.id:
                    raise DuplicateOrigin(f"active task {t.id} already spawned from {origin.id}")
            task = Task(
                id=self._id_factory(),
                goal=goal,
                kind=kind,
                state=TaskState.ACTIVE,
                created_at=Timestamp(self._clock.now_nanos(), 0),
                origin_event=origin.id,
            )
            self._tasks[task.id] = task
            self._trace({"type": "task_spawned", "task_id": task.id, "kind": kind.value})
            return task

    def _active(self, task_id: str) -> Task:
        task = self._tasks.get(task_id)
        if task is None:
            raise NotActive(f"unknown task {task_id}")
        if task.state is not TaskState.ACTIVE:
            raise NotActive(f"task {task_id} is {task.state.value}")
        return task

    def note_decision(self, task_id: str, d: Decision) -> Task:
        """Append the decision to the task history and police noop streaks."""
        with self._lock:
            task = self._active(task_id)
            task.history.append(d.event_id)
            if d.chosen.verb is Verb.NOOP:
                task.noop_streak += 1
                if task.noop_streak >= self.noop_cutoff:
                    task.state = TaskState.FAILED
                    self._trace({"type": "task_failed", "task_id": task.id, "reason": "noop streak"})
            else:
                task.noop_streak = 0
            return task

    def complete_task(self, task_id: str) -> Task:
        with self._lock:
            task = self._active(task_id)
            task.state = TaskState.COMPLETED
            self._trace({"type": "task_completed", "task_id": task.id})
            return task

    def fail_task(self, task_id: str) -> Task:
        with self._lock:
            task = self._active(task_id)
            task.state = TaskState.FAILED
            self._trace({"type": "task_failed", "task_id": task.id, "reason": "host"})
            return task

    def sweep_episode(self) -> tuple[str, ...]:
        """Expire short-term tasks still active at episode end."""
        with self._lock:
            swept = []
            for task in self._tasks.values():
                if task.state is TaskState.ACTIVE and task.kind is TaskKind.SHORT_TERM:
                    task.state = TaskState.EXPIRED
                    swept.append(task.id)
            if swept:
                self._trace({"type": "episode_sweep", "expired": swept})
            return tuple(swept)

    # ─── queries ───

    def get(self, task_id: str) -> Task | None:
        with self._lock:
            return self._tasks.get(task_id)

    def tasks(self) -> tuple[Task, ...]:
        with self._lock:
            return tuple(self._tasks.values())

    def active_context(self) -> list[str]:
        """One-line summaries of the active tasks, newest first."""
        with self._lock:
            active = [t for t in self._tasks.values() if t.state is TaskState.ACTIVE]
            active.reverse()
            active.sort(key=lambda t: t.created_at.key(), reverse=True)
            return [t.summary() for t in active]


__all__ = [
    "DuplicateOrigin",
    "NotActive",
    "Task",
    "TaskKind",
    "TaskManager",
    "TaskState",
]
