"""Two-stage action selection: propose up to five candidates, then pick one.

Stage one (generate_candidates) turns the freshest event plus retrieved
memory into a short list of grammar-valid, availability-checked actions.
Stage two (dispatch) picks exactly one of them by 1-based index, or noop.
Provider failures never wedge the loop: candidate-stage transport failures
re-admit the event once, dispatch-stage failures decide noop.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Callable, Sequence

from . import prompts
from .actions import NOOP, Action, ParseError, allowed, parse_action
from .memory import MemoryContext, MemoryStore
from .pipeline import EventQueue
from .providers import Provider, ProviderError, request
from .types import Clock, Event, SystemClock, Timestamp, Tracer

CANDIDATE_CAP = 5


@dataclass(frozen=True, slots=True)
class CandidateSet:
    """Ordered action proposals for one event, with parallel rationales."""

    event_id: str
    candidates: tuple[Action, ...] = ()
    rationales: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.candidates) > CANDIDATE_CAP:
            raise ValueError(f"at most {CANDIDATE_CAP} candidates, got {len(self.candidates)}")
        if len(self.rationales) != len(self.candidates):
            raise ValueError("rationales must parallel candidates")

    def __len__(self) -> int:
        return len(self.candidates)


@dataclass(frozen=True, slots=True)
class Decision:
    """Outcome of one cycle: the single action chosen for an event."""

    event_id: str
    chosen: Action
    candidate_count: int
    memory_version: int
    decided_at: Timestamp


class DecisionEngine:
    """Runs the candidate/dispatch stages against one provider.

    ``task_context`` supplies the one-line active task summaries injected
    into both prompts; the orchestrator wires it to the task manager.
    """

    def __init__(
        self,
        provider: Provider,
        *,
        clock: Clock | None = None,
        tracer: Tracer | None = None,
        task_context: Callable[[], list[str]] | None = None,
        k_old: int = 4,
        k_short: int = 8,
    ) -> None:
        self.provider = provider
        self._clock = clock or SystemClock()
        self._tracer = tracer
        self._task_context = task_context or (lambda: [])
        self.k_old = k_old
        self.k_short = k_short
        self._failed_once: set[str] = set()

    def _trace(self, record: dict) -> None:
        if self._tracer is not None:
            self._tracer.emit(record)

    def _now(self) -> Timestamp:
        return Timestamp(self._clock.now_nanos(), 0)

    # ─── stage one: candidate generation ───

    def generate_candidates(
        self, e: Event, ctx: MemoryContext, peers: Sequence[Event] = ()
    ) -> CandidateSet:
        """Ask the provider for proposals; keep the first five that survive
        grammar parsing and the event's availability constraint."""
        req = request(
            prompts.load_prompt("candidate_generator"),
            prompts.render_candidate_request(e, ctx, peers, self._task_context()),
        )
        reply = self.provider.complete(req)
        try:
            proposals = json.loads(reply.content)
        except json.JSONDecodeError as exc:
            self._trace({"type": "candidate_reply_unparseable", "event_id": e.id, "reason": str(exc)})
            return CandidateSet(event_id=e.id)
        if not isinstance(proposals, list):
            self._trace({"type": "candidate_reply_unparseable", "event_id": e.id, "reason": "not a list"})
            return CandidateSet(event_id=e.id)

        kept: list[Action] = []
        rationales: list[str] = []
        dropped_over_cap = 0
        for i, raw in enumerate(proposals):
            if not isinstance(raw, dict) or not isinstance(raw.get("action"), str):
                self._trace({"type": "drop_candidate", "event_id": e.id, "index": i, "reason": "malformed entry"})
                continue
            try:
                a = parse_action(raw["action"])
            except ParseError as exc:
                self._trace({"type": "drop_candidate", "event_id": e.id, "index": i, "reason": str(exc)})
                continue
            if not allowed(a, e.available_actions):
                self._trace({"type": "drop_candidate", "event_id": e.id, "index": i, "reason": "not available"})
                continue
            if len(kept) == CANDIDATE_CAP:
                dropped_over_cap += 1
                continue
            kept.append(a)
            rationale = raw.get("rationale")
            rationales.append(rationale if isinstance(rationale, str) else "")
        if dropped_over_cap:
            self._trace({"type": "candidates_truncated", "event_id": e.id, "dropped": dropped_over_cap})
        return CandidateSet(event_id=e.id, candidates=tuple(kept), rationales=tuple(rationales))

    # ─── stage two: dispatch ───

    def dispatch(self, cs: CandidateSet, e: Event, ctx: MemoryContext) -> Decision:
        """Choose exactly one candidate by strict 1-based index, or noop."""
        if not cs.candidates:
            return Decision(e.id, NOOP, 0, ctx.version, self._now())
        req = request(
            prompts.load_prompt("dispatcher"),
            prompts.render_dispatch_request(e, cs, ctx, self._task_context()),
        )
        try:
            reply = self.provider.complete(req)
        except ProviderError as exc:
            self._trace({"type": "dispatch_provider_error", "event_id": e.id, "reason": str(exc)})
            return Decision(e.id, NOOP, len(cs), ctx.version, self._now())
        answer = reply.content.strip()
        if answer == "noop":
            return Decision(e.id, NOOP, len(cs), ctx.version, self._now())
        if re.fullmatch(r"[1-9][0-9]*", answer):
            index = int(answer)
            if index <= len(cs.candidates):
                return Decision(e.id, cs.candidates[index - 1], len(cs), ctx.version, self._now())
        self._trace({"type": "dispatch_coerced", "event_id": e.id, "reply": answer[:80]})
        return Decision(e.id, NOOP, len(cs), ctx.version, self._now())

    # ─── one full cycle ───

    def select_action(
        self, queue: EventQueue, memory: MemoryStore, now_nanos: int
    ) -> Decision | None:
        """Pop the freshest event and decide on it; None means idle.

        A transport failure during candidate generation re-admits the event
        once (cycle skipped); a second failure for the same event decides
        noop so the loop always progresses.
        """
        e = queue.pop_latest(now_nanos)
        if e is None:
            return None
        peers = queue.live(now_nanos)
        ctx = memory.retrieve(e, self.k_old, self.k_short)
        try:
            cs = self.generate_candidates(e, ctx, peers)
        except ProviderError as exc:
            if e.id not in self._failed_once:
                self._failed_once.add(e.id)
                queue.readmit(e)
                self._trace({"type": "cycle_skipped", "event_id": e.id, "reason": str(exc)})
                return None
            self._trace({"type": "cycle_degraded", "event_id": e.id, "reason": str(exc)})
            return Decision(e.id, NOOP, 0, ctx.version, self._now())
        return self.dispatch(cs, e, ctx)


__all__ = [
    "CANDIDATE_CAP",
    "CandidateSet",
    "Decision",
    "DecisionEngine",
]
