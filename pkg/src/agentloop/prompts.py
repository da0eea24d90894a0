"""Prompt assets and the structured request payloads exchanged with providers.

Every provider request is a tag line followed by one canonical JSON object,
so scripted providers can parse requests mechanically and remote models get
an unambiguous contract.
"""

from __future__ import annotations

import json
from importlib.resources import files
from typing import TYPE_CHECKING, Any, Iterable, Sequence

from .types import canonical_json, event_to_dict

if TYPE_CHECKING:  # pragma: no cover
    from .decision import CandidateSet
    from .memory import MemoryContext
    from .pipeline import RawInput
    from .types import Event

EVENT_TAG = "## generate-events"
CANDIDATE_TAG = "## generate-candidates"
DISPATCH_TAG = "## dispatch"


def load_prompt(name: str) -> str:
    """Read a system-prompt asset shipped with the package."""
    return files("agentloop").joinpath("assets", "prompts", f"{name}.txt").read_text(encoding="utf-8")


def _memory_payload(ctx: "MemoryContext") -> dict[str, Any]:
    return {"old_facts": list(ctx.old_facts), "short_term": list(ctx.short_term)}


def render_event_request(raw: "RawInput") -> str:
    payload = {"source": raw.source.value, "payload": raw.payload}
    return f"{EVENT_TAG}\n{canonical_json(payload)}"


def render_candidate_request(
    event: "Event",
    ctx: "MemoryContext",
    peers: Sequence["Event"],
    tasks: Iterable[str],
) -> str:
    payload = {
        "event": event_to_dict(event),
        "memory": _memory_payload(ctx),
        "peers": [event_to_dict(p) for p in peers],
        "tasks": list(tasks),
    }
    return f"{CANDIDATE_TAG}\n{canonical_json(payload)}"


def render_dispatch_request(
    event: "Event",
    cs: "CandidateSet",
    ctx: "MemoryContext",
    tasks: Iterable[str],
) -> str:
    payload = {
        "event": event_to_dict(event),
        "candidates": [
            {"index": i + 1, "action": str(a), "rationale": r}
            for i, (a, r) in enumerate(zip(cs.candidates, cs.rationales))
        ],
        "memory": _memory_payload(ctx),
        "tasks": list(tasks),
    }
    return f"{DISPATCH_TAG}\n{canonical_json(payload)}"


def parse_request(content: str) -> tuple[str, dict[str, Any]]:
    """Split a rendered request back into its tag and payload object."""
    tag, _, body = content.partition("\n")
    return tag, json.loads(body)


__all__ = [
    "CANDIDATE_TAG",
    "DISPATCH_TAG",
    "EVENT_TAG",
    "load_prompt",
    "parse_request",
    "render_candidate_request",
    "render_dispatch_request",
    "render_event_request",
]
