"""Deterministic scripted players for the simulated shop.

Both players speak the provider wire contract (tagged JSON requests in,
JSON replies out) so the whole loop runs exactly as it would against a
remote model, just without one.

OptimalShopPlayer reads each observation and plays the best line: search
for the target attributes, open the best-priced match, set every target
option, buy.  SingleShotPlayer is the ablation: it plans once from the
first observation and replays that plan blind, never reacting to feedback.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from . import prompts
from .actions import Action, Verb, render_action
from .providers import CompletionRequest, Message, Role, ScriptExhausted

_INSTRUCTION_RE = re.compile(r"Instruction: (.*)")
_GOAL_RE = re.compile(r"Buy a (.+) item; options: (.+); budget \$([0-9.]+)")
_RESULT_LINE_RE = re.compile(r"^\d+\. id=(\S+) \| .+ \| \$([0-9.]+) \| attrs: (.*)$")
_PRODUCT_ID_RE = re.compile(r"^id=(\S+) \|", re.MULTILINE)
_OPTION_RE = re.compile(r'([A-Za-z0-9_]+)=.*? \(click\["(.*?)"\]\)')

_PAGE_TAGS = ("[search home]", "[results]", "[product]", "[done]")


@dataclass(frozen=True, slots=True)
class Goal:
    attributes: frozenset[str]
    options: tuple[tuple[str, str], ...]
    price_cap: float

    def query(self) -> str:
        return " ".join(sorted(self.attributes))


def parse_goal(text: str) -> Goal | None:
    """Recover the shopping goal from an instruction line."""
    m = _GOAL_RE.search(text)
    if m is None:
        return None
    attrs = frozenset(m.group(1).split())
    options: list[tuple[str, str]] = []
    if m.group(2) != "none":
        for pair in m.group(2).split(", "):
            key, _, value = pair.partition("=")
            options.append((key, value))
    return Goal(attrs, tuple(sorted(options)), float(m.group(3)))


def current_page(text: str) -> str | None:
    """The page tag appearing last in the text is the current one."""
    best, pos = None, -1
    for tag in _PAGE_TAGS:
        at = text.rfind(tag)
        if at > pos:
            best, pos = tag, at
    return best


def _parse_results(text: str) -> list[tuple[str, float, frozenset[str]]]:
    rows = []
    for line in text.splitlines():
        m = _RESULT_LINE_RE.match(line)
        if m:
            rows.append((m.group(1), float(m.group(2)), frozenset(m.group(3).split(", "))))
    return rows


def _parse_product(text: str) -> tuple[str, dict[str, str], dict[str, str]]:
    pid = ""
    m = _PRODUCT_ID_RE.search(text)
    if m:
        pid = m.group(1)
    options: dict[str, str] = {}
    chosen: dict[str, str] = {}
    for line in text.splitlines():
        if line.startswith("options: "):
            options = {k: v for k, v in _OPTION_RE.findall(line)}
        elif line.startswith("chosen: ") and line != "chosen: none":
            for pair in line[len("chosen: "):].split(", "):
                key, _, value = pair.partition("=")
                chosen[key] = value
    return pid, options, chosen


class _ShopPlayer:
    """Shared wire plumbing: event echo and index-1 dispatch."""

    def __init__(self) -> None:
        self.call_count = 0

    def complete(self, req: CompletionRequest) -> Message:
        self.call_count += 1
        tag, payload = prompts.parse_request(req.last_user_content())
        if tag == prompts.EVENT_TAG:
            return Message(Role.ASSISTANT, self._echo_event(payload["payload"]))
        if tag == prompts.CANDIDATE_TAG:
            return Message(Role.ASSISTANT, json.dumps(self._candidates(payload["event"])))
        if tag == prompts.DISPATCH_TAG:
            return Message(Role.ASSISTANT, "1")
        raise ScriptExhausted(f"unexpected request tag {tag!r}")

    def _echo_event(self, text: str) -> str:
        m = _INSTRUCTION_RE.search(text)
        intent = m.group(1) if m else text.splitlines()[0]
        available: list[str] = []
        for line in text.splitlines():
            if line.startswith("Available actions: "):
                rest = line[len("Available actions: "):]
                available = [] if rest == "none" else rest.split(" | ")
        event = {
            "intent": intent,
            "instruction": m.group(1) if m else "",
            "observations": [text],
            "available_actions": available,
        }
        return json.dumps([event])

    def _candidates(self, event: dict) -> list[dict]:
        raise NotImplementedError

    @staticmethod
    def _observation(event: dict) -> str:
        obs = event.get("observations") or []
        return "\n".join(obs) if obs else str(event.get("intent", ""))

    @staticmethod
    def _propose(*actions: Action) -> list[dict]:
        return [{"action": render_action(a), "rationale": "scripted play"} for a in actions]


class OptimalShopPlayer(_ShopPlayer):
    """Plays each fixture task to reward 1.0 by reading every observation."""

    def __init__(self) -> None:
        super().__init__()
        self._rejected: set[str] = set()

    def _candidates(self, event: dict) -> list[dict]:
        text = self._observation(event)
        page = current_page(text)
        goal = parse_goal(text)
        if page is None or goal is None or page == "[done]":
            return []
        if page == "[search home]":
            return self._propose(Action(Verb.SEARCH, goal.query()))
        if page == "[results]":
            return self._pick_result(text, goal)
        return self._work_product(text, goal)

    def _pick_result(self, text: str, goal: Goal) -> list[dict]:
        rows = _parse_results(text)
        for pid, price, attrs in rows:
            if pid in self._rejected:
                continue
            if goal.attributes <= attrs and price <= goal.price_cap:
                return self._propose(Action(Verb.CLICK, pid))
        fresh = [pid for pid, _, _ in rows if pid not in self._rejected]
        if fresh:
            return self._propose(Action(Verb.CLICK, fresh[0]))
        return self._propose(Action(Verb.SEARCH, goal.query()))

    def _work_product(self, text: str, goal: Goal) -> list[dict]:
        pid, options, chosen = _parse_product(text)
        for key, value in goal.options:
            if options.get(key) != value:
                self._rejected.add(pid)
                return self._propose(Action(Verb.CLICK, "Back"))
        for key, value in goal.options:
            if chosen.get(key) != value:
                return self._propose(Action(Verb.CLICK, value))
        return self._propose(Action(Verb.CLICK, "Buy Now"))


class SingleShotPlayer(_ShopPlayer):
    """Plans two moves from the first observation, then goes blind.

    The fixed plan is replayed one action per cycle with no regard for
    what the environment now shows; once it runs out, the player proposes
    nothing and the dispatcher's forced noop takes over.
    """

    def __init__(self) -> None:
        super().__init__()
        self._plan: list[Action] | None = None
        self._cursor = 0

    def _candidates(self, event: dict) -> list[dict]:
        if self._plan is None:
            goal = parse_goal(self._observation(event))
            if goal is None:
                self._plan = []
            else:
                self._plan = [
                    Action(Verb.SEARCH, goal.query()),
                    Action(Verb.CLICK, "Buy Now"),
                ]
        if self._cursor >= len(self._plan):
            return []
        action = self._plan[self._cursor]
        self._cursor += 1
        return self._propose(action)


__all__ = [
    "Goal",
    "OptimalShopPlayer",
    "SingleShotPlayer",
    "current_page",
    "parse_goal",
]
