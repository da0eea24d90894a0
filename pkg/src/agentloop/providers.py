"""Reasoning providers: a chat-completion wire client and a scripted test double.

Both flavors implement the same ``complete`` contract, so the full decision
loop runs unmodified on either.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Protocol, Sequence

from . import wire
from .types import canonical_json


class Role(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


@dataclass(frozen=True, slots=True)
class Message:
    role: Role
    content: str

    def __post_init__(self) -> None:
        if self.role in (Role.SYSTEM, Role.USER) and not self.content:
            raise ValueError(f"{self.role.value} message content must be non-empty")


@dataclass(frozen=True, slots=True)
class CompletionRequest:
    messages: tuple[Message, ...]
    temperature: float = 0.0
    max_output: int = 1024

    def __post_init__(self) -> None:
        if not self.messages or self.messages[0].role is not Role.SYSTEM:
            raise ValueError("first message must have role system")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    def last_user_content(self) -> str:
        for m in reversed(self.messages):
            if m.role is Role.USER:
                return m.content
        return ""


def request(system: str, user: str, *, temperature: float = 0.0, max_output: int = 1024) -> CompletionRequest:
    return CompletionRequest(
        messages=(Message(Role.SYSTEM, system), Message(Role.USER, user)),
        temperature=temperature,
        max_output=max_output,
    )


class ProviderError(Exception):
    """The provider could not produce a usable assistant reply."""


class Exhausted(ProviderError):
    """Retries were exhausted without a successful reply."""


class ScriptExhausted(ProviderError):
    """A scripted provider had no rule for the request and no default."""


class Provider(Protocol):
    def complete(self, req: CompletionRequest) -> Message: ...


class RemoteProvider:
    """OpenAI-compatible chat-completions client.

    POSTs to ``{base_url}/v1/chat/completions`` and reads
    ``choices[0].message.content``.  Transient transport failures and 429
    replies are retried up to ``retries`` times with exponential backoff.
    The API key is read from an environment variable and never logged.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        *,
        api_key_env: str = "AGENTLOOP_API_KEY",
        timeout: float = 30.0,
        retries: int = 2,
        backoff: float = 0.25,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self._sleep = sleep
        self._api_key = os.environ.get(api_key_env, "")

    def _body(self, req: CompletionRequest) -> str:
        return canonical_json(
            {
                "model": self.model,
                "messages": [{"role": m.role.value, "content": m.content} for m in req.messages],
                "temperature": req.temperature,
                "max_tokens": req.max_output,
            }
        )

    def complete(self, req: CompletionRequest) -> Message:
        url = f"{self.base_url}/v1/chat/completions"
        headers = {"Authorization": f"Bearer {self._api_key}"} if self._api_key else {}
        body = self._body(req)
        last: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                self._sleep(self.backoff * (2 ** (attempt - 1)))
            try:
                reply = wire.post_json(url, body, timeout=self.timeout, headers=headers)
            except wire.Transport as exc:
                last = exc
                continue
            except wire.BadStatus as exc:
                if exc.status == 429:  # rate limited: retry
                    last = exc
                    continue
                raise ProviderError(str(exc)) from exc
            except wire.MalformedReply as exc:
                raise ProviderError(str(exc)) from exc
            try:
                content = reply["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError):
                raise ProviderError("reply lacks choices[0].message.content") from None
            if not isinstance(content, str):
                raise ProviderError("completion content is not a string")
            return Message(Role.ASSISTANT, content)
        raise Exhausted(f"no reply after {self.retries + 1} attempts: {last}") from last


@dataclass(slots=True)
class Rule:
    """One scripted exchange: substring matcher over the last user message."""

    pattern: str
    reply: str
    once: bool = False
    used: bool = field(default=False, init=False)


class ScriptedProvider:
    """Deterministic provider answering from an ordered rule list.

    The first live rule whose pattern is a substring of the last user
    message wins; one-shot rules are consumed on use.  Unmatched requests
    return the default reply, or raise ScriptExhausted if none is set.
    """

    def __init__(self, rules: Sequence[Rule] = (), *, default: str | None = None) -> None:
        self._rules = list(rules)
        self._default = default
        self.call_count = 0

    def complete(self, req: CompletionRequest) -> Message:
        self.call_count += 1
        content = req.last_user_content()
        for rule in self._rules:
            if rule.once and rule.used:
                continue
            if rule.pattern in content:
                rule.used = True
                return Message(Role.ASSISTANT, rule.reply)
        if self._default is not None:
            return Message(Role.ASSISTANT, self._default)
        raise ScriptExhausted(f"no rule matches request ({self.call_count} calls served)")


class FailingProvider:
    """Always raises; exercises the loop's failure and liveness paths."""

    def __init__(self) -> None:
        self.call_count = 0

    def complete(self, req: CompletionRequest) -> Message:
        self.call_count += 1
        raise ProviderError("provider permanently unavailable")


__all__ = [
    "CompletionRequest",
    "Exhausted",
    "FailingProvider",
    "Message",
    "Provider",
    "ProviderError",
    "RemoteProvider",
    "Role",
    "Rule",
    "ScriptExhausted",
    "ScriptedProvider",
    "request",
]
