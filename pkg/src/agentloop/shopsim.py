"""Deterministic simulated shop: search, browse, pick options, buy.

A small stand-in for a web-shopping benchmark environment.  Identical
action sequences over identical (catalog, task) inputs produce identical
observation and reward transcripts, byte for byte, which the test suite
leans on heavily.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib.resources import files
from typing import Iterable, Mapping

from .actions import Action, ActionPattern, Verb, allowed, parse_pattern
from .memory import tokenize
from .types import SchemaError

SEARCH_ANY = parse_pattern("search[*]")
BUY_NOW = "Buy Now"
BACK = "Back"


class EmptyCatalog(ValueError):
    """The simulator needs at least one product."""


class IllegalAction(ValueError):
    """The action is not in the advertised available set; no step is burned."""


class EpisodeOver(RuntimeError):
    """step() was called after the episode finished."""


@dataclass(frozen=True, slots=True)
class Product:
    id: str
    title: str
    attributes: frozenset[str]
    options: Mapping[str, str]
    price: float

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("product id must be non-empty")
        if self.price < 0:
            raise ValueError("price must be non-negative")


@dataclass(frozen=True, slots=True)
class TaskSpec:
    id: str
    instruction: str
    target_attributes: frozenset[str]
    target_options: Mapping[str, str]
    price_cap: float

    def __post_init__(self) -> None:
        if not self.target_attributes:
            raise ValueError("target_attributes must be non-empty")


class Page(str, Enum):
    SEARCH_HOME = "search_home"
    RESULTS = "results"
    PRODUCT = "product"
    DONE = "done"


@dataclass(frozen=True, slots=True)
class StepResult:
    observation: str
    available: tuple[ActionPattern, ...]
    done: bool
    reward: float | None


def reward(selected: Product, chosen_options: Mapping[str, str], spec: TaskSpec) -> float:
    """Fraction of satisfied targets: attributes, option pairs, price cap."""
    matched_attrs = len(selected.attributes & spec.target_attributes)
    matched_options = sum(
        1 for k, v in spec.target_options.items() if chosen_options.get(k) == v
    )
    price_ok = 1 if selected.price <= spec.price_cap else 0
    denom = len(spec.target_attributes) + len(spec.target_options) + 1
    return (matched_attrs + matched_options + price_ok) / denom


def rank_products(query: str, catalog: Iterable[Product], top_k: int) -> list[str]:
    """Distinct-token overlap between the query and title+attributes;
    ties by product id ascending."""
    q_tokens = set(tokenize(query))
    scored = []
    for p in catalog:
        p_tokens = set(tokenize(p.title)) | set().union(
            *(set(tokenize(a)) for a in p.attributes)
        )
        scored.append((len(q_tokens & p_tokens), p.id))
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return [pid for score, pid in scored[:top_k]]


class ShopSim:
    """One episode of the shop against one task spec."""

    def __init__(
        self,
        catalog: Iterable[Product],
        spec: TaskSpec,
        *,
        step_cap: int = 15,
        top_k: int = 5,
    ) -> None:
        self.catalog = tuple(catalog)
        if not self.catalog:
            raise EmptyCatalog("catalog must contain at least one product")
        ids = [p.id for p in self.catalog]
        if len(set(ids)) != len(ids):
            raise ValueError("product ids must be unique")
        if step_cap < 1 or top_k < 1:
            raise ValueError("step_cap and top_k must be >= 1")
        self.spec = spec
        self.step_cap = step_cap
        self.top_k = top_k
        self._by_id = {p.id: p for p in self.catalog}
        self.reset()

    # ─── state accessors ───

    @property
    def page(self) -> Page:
        return self._page

    @property
    def steps(self) -> int:
        return self._steps

    @property
    def query(self) -> str:
        return self._query

    @property
    def selected(self) -> str | None:
        return self._selected

    @property
    def chosen_options(self) -> dict[str, str]:
        return dict(self._chosen)

    @property
    def done(self) -> bool:
        return self._page is Page.DONE

    # ─── lifecycle ───

    def reset(self) -> StepResult:
        self._page = Page.SEARCH_HOME
        self._query = ""
        self._results: list[str] = []
        self._selected: str | None = None
        self._chosen: dict[str, str] = {}
        self._steps = 0
        self._reward: float | None = None
        self._purchased: str | None = None
        return self.observe()

    def observe(self) -> StepResult:
        """Current observation and available actions; does not burn a step."""
        return StepResult(self._observation(), self._available(), self.done, self._reward)

    def step(self, a: Action) -> StepResult:
        if self._page is Page.DONE:
            raise EpisodeOver("episode already finished")
        if a.verb is not Verb.NOOP and not allowed(a, self._available()):
            raise IllegalAction(f"{a} not available on page {self._page.value}")
        self._steps += 1
        purchased = False
        if a.verb is Verb.SEARCH:
            self._query = a.arg or ""
            self._results = rank_products(self._query, self.catalog, self.top_k)
            self._selected = None
            self._chosen = {}
            self._page = Page.RESULTS
        elif a.verb is Verb.CLICK:
            purchased = self._click(a.arg or "")
        if not purchased and self._steps >= self.step_cap:
            self._page = Page.DONE
            self._reward = 0.0
        return self.observe()

    def _click(self, arg: str) -> bool:
        if self._page is Page.RESULTS:
            self._selected = arg
            self._chosen = {}
            self._page = Page.PRODUCT
            return False
        # product page
        if arg == BUY_NOW:
            self._page = Page.DONE
            self._purchased = self._selected
            self._reward = reward(self._by_id[self._selected or ""], self._chosen, self.spec)
            return True
        if arg == BACK:
            self._selected = None
            self._chosen = {}
            self._page = Page.RESULTS
            return False
        product = self._by_id[self._selected or ""]
        for key in sorted(product.options):
            if product.options[key] == arg:
                self._chosen[key] = arg
                break
        return False

    # ─── advertised actions ───

    def _available(self) -> tuple[ActionPattern, ...]:
        if self._page is Page.SEARCH_HOME:
            return (SEARCH_ANY,)
        if self._page is Page.RESULTS:
            clicks = tuple(ActionPattern(Verb.CLICK, pid) for pid in self._results)
            return (SEARCH_ANY, *clicks)
        if self._page is Page.PRODUCT:
            product = self._by_id[self._selected or ""]
            values = tuple(
                ActionPattern(Verb.CLICK, product.options[k]) for k in sorted(product.options)
            )
            return (
                ActionPattern(Verb.CLICK, BUY_NOW),
                *values,
                ActionPattern(Verb.CLICK, BACK),
            )
        return ()

    # ─── observation text ───

    def _observation(self) -> str:
        instr = self.spec.instruction
        if self._page is Page.SEARCH_HOME:
            return f"[search home] Instruction: {instr}\nType a query to find items."
        if self._page is Page.RESULTS:
            lines = [f"[results] Instruction: {instr}", f'Results for "{self._query}":']
            for i, pid in enumerate(self._results, 1):
                p = self._by_id[pid]
                attrs = ", ".join(sorted(p.attributes))
                lines.append(f"{i}. id={p.id} | {p.title} | ${p.price:.2f} | attrs: {attrs}")
            return "\n".join(lines)
        if self._page is Page.PRODUCT:
            p = self._by_id[self._selected or ""]
            attrs = ", ".join(sorted(p.attributes))
            if p.options:
                opts = ", ".join(
                    f'{k}={p.options[k]} (click["{p.options[k]}"])' for k in sorted(p.options)
                )
            else:
                opts = "none"
            chosen = ", ".join(f"{k}={self._chosen[k]}" for k in sorted(self._chosen)) or "none"
            return (
                f"[product] Instruction: {instr}\n"
                f"id={p.id} | {p.title} | ${p.price:.2f}\n"
                f"attrs: {attrs}\n"
                f"options: {opts}\n"
                f"chosen: {chosen}"
            )
        if self._purchased is not None:
            return f"[done] Purchased {self._purchased} | reward: {self._reward!r}"
        return f"[done] Step limit reached | reward: {self._reward!r}"


# ─── fixture loading ───


def _require(raw: dict, field: str, kind: type, line: int):
    value = raw.get(field)
    if not isinstance(value, kind) or (kind is str and not value):
        raise SchemaError(field, f"line {line}: expected non-empty {kind.__name__}")
    return value


def _parse_product(raw: dict, line: int) -> Product:
    price = raw.get("price")
    if not isinstance(price, (int, float)) or isinstance(price, bool) or price < 0:
        raise SchemaError("price", f"line {line}: expected non-negative number")
    attrs = _require(raw, "attributes", list, line)
    options = _require(raw, "options", dict, line)
    if any(not isinstance(a, str) for a in attrs):
        raise SchemaError("attributes", f"line {line}: expected list of strings")
    if any(not isinstance(k, str) or not isinstance(v, str) for k, v in options.items()):
        raise SchemaError("options", f"line {line}: expected string map")
    return Product(
        id=_require(raw, "id", str, line),
        title=_require(raw, "title", str, line),
        attributes=frozenset(attrs),
        options=dict(options),
        price=float(price),
    )


def _parse_task(raw: dict, line: int) -> TaskSpec:
    cap = raw.get("price_cap")
    if not isinstance(cap, (int, float)) or isinstance(cap, bool) or cap < 0:
        raise SchemaError("price_cap", f"line {line}: expected non-negative number")
    attrs = _require(raw, "target_attributes", list, line)
    if not attrs or any(not isinstance(a, str) for a in attrs):
        raise SchemaError("target_attributes", f"line {line}: expected non-empty list of strings")
    options = _require(raw, "target_options", dict, line) if "target_options" in raw else {}
    if any(not isinstance(k, str) or not isinstance(v, str) for k, v in options.items()):
        raise SchemaError("target_options", f"line {line}: expected string map")
    return TaskSpec(
        id=_require(raw, "id", str, line),
        instruction=_require(raw, "instruction", str, line),
        target_attributes=frozenset(attrs),
        target_options=dict(options),
        price_cap=float(cap),
    )


def _load_lines(text: str, parse, what: str):
    out = []
    for i, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(what, f"line {i}: invalid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise SchemaError(what, f"line {i}: expected an object")
        out.append(parse(raw, i))
    return out


def load_catalog(path: str) -> tuple[Product, ...]:
    with open(path, encoding="utf-8") as fh:
        products = _load_lines(fh.read(), _parse_product, "catalog")
    ids = [p.id for p in products]
    dupes = {i for i in ids if ids.count(i) > 1}
    if dupes:
        raise SchemaError("id", f"duplicate product ids: {sorted(dupes)}")
    return tuple(products)


def load_tasks(path: str) -> tuple[TaskSpec, ...]:
    with open(path, encoding="utf-8") as fh:
        return tuple(_load_lines(fh.read(), _parse_task, "tasks"))


def default_catalog() -> tuple[Product, ...]:
    text = files("agentloop").joinpath("assets", "fixtures", "catalog.jsonl").read_text("utf-8")
    return tuple(_load_lines(text, _parse_product, "catalog"))


def default_tasks() -> tuple[TaskSpec, ...]:
    text = files("agentloop").joinpath("assets", "fixtures", "tasks.jsonl").read_text("utf-8")
    return tuple(_load_lines(text, _parse_task, "tasks"))


__all__ = [
    "BACK",
    "BUY_NOW",
    "EmptyCatalog",
    "EpisodeOver",
    "IllegalAction",
    "Page",
    "Product",
    "ShopSim",
    "StepResult",
    "TaskSpec",
    "default_catalog",
    "default_tasks",
    "load_catalog",
    "load_tasks",
    "rank_products",
    "reward",
]
