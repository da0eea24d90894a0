"""Minimal JSON-over-HTTP plumbing shared by the remote provider and memory clients.

Built on urllib so the core package carries no HTTP dependency and stays
importable on constrained interpreters.
"""

from __future__ import annotations

import json
import urllib.error
import urllib.request
from typing import Any

from .types import canonical_json


class WireError(Exception):
    """Base for remote-call failures."""


class Transport(WireError):
    """The request never produced an HTTP response."""


class BadStatus(WireError):
    """The server answered with a non-2xx status."""

    def __init__(self, status: int, detail: str = "") -> None:
        super().__init__(f"HTTP {status}" + (f": {detail}" if detail else ""))
        self.status = status
        self.detail = detail


class MalformedReply(WireError):
    """The response body was not the expected JSON shape."""


def post_json(url: str, payload: Any, *, timeout: float, headers: dict[str, str] | None = None) -> Any:
    """POST a JSON payload and decode the JSON reply.

    ``payload`` may be a pre-serialized string or any JSON-encodable object;
    objects are serialized canonically so request bytes are reproducible.
    """
    body = payload if isinstance(payload, str) else canonical_json(payload)
    req = urllib.request.Request(
        url,
        data=body.encode("utf-8"),
        headers={"Content-Type": "application/json", **(headers or {})},
        method="POST",
    )
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            raw = resp.read()
    except urllib.error.HTTPError as exc:
        detail = ""
        try:
            detail = exc.read().decode("utf-8", "replace")[:200]
        except Exception:
            pass
        raise BadStatus(exc.code, detail) from None
    except (urllib.error.URLError, OSError) as exc:
        raise Transport(str(exc)) from None
    try:
        return json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedReply(f"response is not JSON: {exc}") from None


__all__ = ["BadStatus", "MalformedReply", "Transport", "WireError", "post_json"]
