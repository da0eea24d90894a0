"""Embeddable event-driven agent runtime with a two-stage decision loop.

Raw inputs become structured events; the newest live event drives candidate
generation and dispatch; executed outcomes feed straight back in as new
inputs.  A deterministic shop environment, scripted players, and a CLI make
the whole loop runnable and auditable without any network access.
"""

from .actions import NOOP, Action, ActionPattern, Verb, allowed, parse_action, parse_pattern, render_action
from .decision import CandidateSet, Decision, DecisionEngine
from .effectors import CapabilityMismatch, Effector, ShopEffector, describe_step, feedback_to_input
from .memory import (
    LocalMemory,
    MemoryContext,
    MemoryItem,
    MemoryKind,
    MemoryStore,
    RemoteMemory,
    embed,
    similarity,
    tokenize,
)
from .pipeline import Admission, EventGenerator, EventQueue, RawInput, TimerSource
from .players import OptimalShopPlayer, SingleShotPlayer
from .providers import (
    CompletionRequest,
    FailingProvider,
    Message,
    Provider,
    ProviderError,
    RemoteProvider,
    Role,
    Rule,
    ScriptedProvider,
)
from .runtime import (
    AuditError,
    BatchReport,
    ConfigError,
    EpisodeReport,
    RuntimeConfig,
    load_config,
    load_fixtures,
    run_batch,
    run_bench,
    run_episode,
)
from .shopsim import Product, ShopSim, TaskSpec, default_catalog, default_tasks, load_catalog, load_tasks
from .tasks import Task, TaskKind, TaskManager, TaskState
from .types import (
    Clock,
    Event,
    Feedback,
    SchemaError,
    SimClock,
    Source,
    SystemClock,
    Timestamp,
    Tracer,
    canonical_json,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ActionPattern",
    "Admission",
    "AuditError",
    "BatchReport",
    "CandidateSet",
    "CapabilityMismatch",
    "Clock",
    "CompletionRequest",
    "ConfigError",
    "Decision",
    "DecisionEngine",
    "Effector",
    "EpisodeReport",
    "Event",
    "EventGenerator",
    "EventQueue",
    "FailingProvider",
    "Feedback",
    "LocalMemory",
    "MemoryContext",
    "MemoryItem",
    "MemoryKind",
    "MemoryStore",
    "Message",
    "NOOP",
    "OptimalShopPlayer",
    "Product",
    "Provider",
    "ProviderError",
    "RawInput",
    "RemoteMemory",
    "RemoteProvider",
    "Role",
    "Rule",
    "RuntimeConfig",
    "SchemaError",
    "ScriptedProvider",
    "ShopEffector",
    "ShopSim",
    "SimClock",
    "SingleShotPlayer",
    "Source",
    "SystemClock",
    "Task",
    "TaskKind",
    "TaskManager",
    "TaskSpec",
    "TaskState",
    "TimerSource",
    "Tracer",
    "Timestamp",
    "Verb",
    "allowed",
    "canonical_json",
    "default_catalog",
    "default_tasks",
    "describe_step",
    "embed",
    "feedback_to_input",
    "load_catalog",
    "load_config",
    "load_fixtures",
    "load_tasks",
    "parse_action",
    "parse_pattern",
    "render_action",
    "run_batch",
    "run_bench",
    "run_episode",
    "similarity",
    "tokenize",
]
