"""Effectors execute chosen actions against an environment and emit Feedback.

Every effector executes noop as a no-effect success, so the dispatcher's
noop fallback never trips capability checks.  Feedback converts back into a
raw input (source=feedback) whose payload is the rendered action, a literal
" -> ", and the outcome text, which is what re-enters the event generator
and closes the loop.
"""

from __future__ import annotations

from .actions import Action, Verb, render_action, render_pattern
from .pipeline import RawInput
from .shopsim import EpisodeOver, IllegalAction, ShopSim, StepResult
from .types import Clock, Feedback, Source, SystemClock, Timestamp


class CapabilityMismatch(ValueError):
    """The action's verb is outside this effector's capability set."""


def describe_step(result: StepResult) -> str:
    """Render an environment step as outcome text: observation plus the
    advertised actions."""
    if result.available:
        actions = " | ".join(render_pattern(p) for p in result.available)
    else:
        actions = "none"
    return f"{result.observation}\nAvailable actions: {actions}"


class Effector:
    """Base effector: capability policing and the universal noop."""

    capabilities: frozenset[Verb] = frozenset()

    def __init__(self, *, clock: Clock | None = None) -> None:
        self._clock = clock or SystemClock()

    def _now(self) -> Timestamp:
        return Timestamp(self._clock.now_nanos(), 0)

    def execute(self, a: Action) -> Feedback:
        if a.verb is not Verb.NOOP and a.verb not in self.capabilities:
            raise CapabilityMismatch(f"{a.verb.value} not in {sorted(v.value for v in self.capabilities)}")
        return self._run(a)

    def _run(self, a: Action) -> Feedback:
        if a.verb is Verb.NOOP:
            return Feedback(a, "noop", True, self._now())
        raise NotImplementedError


class ShopEffector(Effector):
    """Binds the decision loop to one simulated-shop episode."""

    capabilities = frozenset({Verb.SEARCH, Verb.CLICK})

    def __init__(self, sim: ShopSim, *, clock: Clock | None = None) -> None:
        super().__init__(clock=clock)
        self.sim = sim

    def _run(self, a: Action) -> Feedback:
        if a.verb is Verb.NOOP:
            # noop burns an environment step while the episode is live, but
            # stays a no-effect success once it is over
            if not self.sim.done:
                self.sim.step(a)
            return Feedback(a, "noop", True, self._now())
        try:
            result = self.sim.step(a)
        except (IllegalAction, EpisodeOver) as exc:
            return Feedback(a, str(exc), False, self._now())
        return Feedback(a, describe_step(result), True, self._now())


def feedback_to_input(f: Feedback) -> RawInput:
    """Close the loop: one raw input per feedback, unconditionally."""
    return RawInput(
        source=Source.FEEDBACK,
        payload=f"{render_action(f.action)} -> {f.outcome}",
        received_at=f.emitted_at,
    )


__all__ = [
    "CapabilityMismatch",
    "Effector",
    "ShopEffector",
    "describe_step",
    "feedback_to_input",
]
