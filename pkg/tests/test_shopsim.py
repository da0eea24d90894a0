"""Simulated shop: ranking oracle, reward oracle, state machine, determinism."""

import itertools
import json
import random
import re

import pytest

from agentloop.actions import NOOP, Action, Verb, parse_action, parse_pattern, render_pattern
from agentloop.shopsim import (
    EmptyCatalog,
    EpisodeOver,
    IllegalAction,
    Page,
    Product,
    ShopSim,
    TaskSpec,
    default_catalog,
    default_tasks,
    load_catalog,
    load_tasks,
    rank_products,
    reward,
)
from agentloop.types import SchemaError

CATALOG = default_catalog()
TASKS = default_tasks()
BY_ID = {p.id: p for p in CATALOG}
T01 = next(t for t in TASKS if t.id == "t01")


def sim(task_id="t01", **kw) -> ShopSim:
    spec = next(t for t in TASKS if t.id == task_id)
    return ShopSim(CATALOG, spec, **kw)


def mini_spec(attrs=("a", "b"), options=(), cap=50.0):
    return TaskSpec(
        id="tx",
        instruction="test",
        target_attributes=frozenset(attrs),
        target_options=dict(options),
        price_cap=cap,
    )


def mini_product(pid="px", attrs=("a",), options=(), price=10.0):
    return Product(
        id=pid, title="Thing", attributes=frozenset(attrs), options=dict(options), price=price
    )


# ─── reward oracle: hand-computed expectations ───


class TestRewardOracle:
    def test_full_match_is_one(self):
        spec = mini_spec(attrs=("a", "b"), options=(("size", "large"),), cap=50.0)
        p = mini_product(attrs=("a", "b", "c"), options=(("size", "large"),), price=20.0)
        assert reward(p, {"size": "large"}, spec) == 1.0

    def test_half_match(self):
        # 2 target attrs, 1 target option, cap met; 1 attr matched, 0 options
        spec = mini_spec(attrs=("a", "b"), options=(("size", "large"),), cap=50.0)
        p = mini_product(attrs=("a", "z"), options=(("size", "large"),), price=20.0)
        assert reward(p, {}, spec) == (1 + 0 + 1) / (2 + 1 + 1)
        assert reward(p, {}, spec) == 0.5

    def test_price_over_cap(self):
        # 2 attrs matched, 0 target options, price over cap
        spec = mini_spec(attrs=("a", "b"), options=(), cap=10.0)
        p = mini_product(attrs=("a", "b"), price=99.0)
        assert reward(p, {}, spec) == (2 + 0 + 0) / (2 + 0 + 1)
        assert abs(reward(p, {}, spec) - 2 / 3) < 1e-12

    def test_wrong_option_value_does_not_count(self):
        spec = mini_spec(attrs=("a",), options=(("color", "blue"),), cap=50.0)
        p = mini_product(attrs=("a",), options=(("color", "red"),))
        assert reward(p, {"color": "red"}, spec) == (1 + 0 + 1) / 3

    def test_bounds_and_maximality_brute_forced(self):
        products = [
            mini_product("q1", attrs=("a", "b"), options=(("size", "s"), ("color", "c")), price=5.0),
            mini_product("q2", attrs=("b", "x"), options=(("size", "s"),), price=15.0),
            mini_product("q3", attrs=("y",), options=(), price=8.0),
        ]
        specs = [
            mini_spec(attrs=("a", "b"), options=(("size", "s"),), cap=10.0),
            mini_spec(attrs=("b",), options=(), cap=6.0),
            mini_spec(attrs=("a", "y"), options=(("color", "c"), ("size", "s")), cap=20.0),
        ]
        for spec in specs:
            for p in products:
                keys = sorted(p.options)
                for r in range(len(keys) + 1):
                    for chosen_keys in itertools.combinations(keys, r):
                        chosen = {k: p.options[k] for k in chosen_keys}
                        got = reward(p, chosen, spec)
                        # independent recomputation
                        attrs = sum(1 for a in spec.target_attributes if a in p.attributes)
                        opts = sum(
                            1 for k, v in spec.target_options.items() if chosen.get(k) == v
                        )
                        ok = 1 if p.price <= spec.price_cap else 0
                        denom = len(spec.target_attributes) + len(spec.target_options) + 1
                        assert got == (attrs + opts + ok) / denom
                        assert 0.0 <= got <= 1.0
                        maximal = (
                            attrs == len(spec.target_attributes)
                            and opts == len(spec.target_options)
                            and ok == 1
                        )
                        assert (got == 1.0) == maximal


# ─── ranking oracle ───


def oracle_rank(query, catalog, top_k):
    def toks(s):
        return {t.lower() for t in re.split(r"[^0-9a-zA-Z]+", s) if t}

    scored = []
    for p in catalog:
        hay = toks(p.title)
        for a in p.attributes:
            hay |= toks(a)
        scored.append((-len(toks(query) & hay), p.id))
    return [pid for _, pid in sorted(scored)[:top_k]]


class TestRanking:
    def test_every_title_ranks_its_product_first(self):
        for p in CATALOG:
            got = rank_products(p.title, CATALOG, 5)
            assert got == oracle_rank(p.title, CATALOG, 5)
            assert got[0] == p.id, f"{p.title} did not rank {p.id} first"

    def test_ties_break_by_id_ascending(self):
        # "coffee" hits p08 and p11 equally; the rest score zero
        got = rank_products("coffee", CATALOG, 5)
        assert got == ["p08", "p11", "p01", "p02", "p03"]
        assert got == oracle_rank("coffee", CATALOG, 5)

    def test_zero_score_products_fill_the_page(self):
        got = rank_products("zzz qqq", CATALOG, 5)
        assert got == ["p01", "p02", "p03", "p04", "p05"]

    def test_top_k_respected(self):
        assert len(rank_products("coffee", CATALOG, 3)) == 3
        assert len(rank_products("coffee", CATALOG, 99)) == len(CATALOG)

    def test_matches_oracle_on_random_queries(self):
        rng = random.Random(7)
        vocab = ["running", "wool", "coffee", "chair", "yoga", "laptop", "blue", "socks", "zzz"]
        for _ in range(100):
            q = " ".join(rng.choices(vocab, k=rng.randint(1, 4)))
            assert rank_products(q, CATALOG, 5) == oracle_rank(q, CATALOG, 5)


# ─── state machine ───


INSTR = "Buy a hiking socks wool item; options: size=large; budget $20.00"


class TestReset:
    def test_reset_state(self):
        s = sim()
        r = s.observe()
        assert s.page is Page.SEARCH_HOME
        assert s.steps == 0
        assert not r.done and r.reward is None
        assert [render_pattern(p) for p in r.available] == ["search[*]"]

    def test_observation_contains_instruction_verbatim(self):
        r = sim().observe()
        assert INSTR in r.observation
        assert r.observation == f"[search home] Instruction: {INSTR}\nType a query to find items."

    def test_reset_restarts_an_episode(self):
        s = sim()
        s.step(parse_action('search["wool"]'))
        s.reset()
        assert s.page is Page.SEARCH_HOME and s.steps == 0


class TestSearch:
    def test_results_observation_frozen(self):
        s = sim()
        r = s.step(parse_action('search["hiking socks wool"]'))
        assert r.observation == (
            f"[results] Instruction: {INSTR}\n"
            'Results for "hiking socks wool":\n'
            "1. id=p03 | Merino Wool Socks | $12.50 | attrs: hiking, socks, wool\n"
            "2. id=p01 | Trail Running Shoes | $89.99 | attrs: lightweight, running, shoes\n"
            "3. id=p02 | Leather Office Chair | $189.00 | attrs: chair, leather, office\n"
            "4. id=p04 | Stainless Water Bottle | $24.00 | attrs: bottle, insulated, steel\n"
            "5. id=p05 | Canvas Tote Bag | $15.00 | attrs: bag, canvas, reusable"
        )
        assert [render_pattern(p) for p in r.available] == [
            "search[*]",
            'click["p03"]',
            'click["p01"]',
            'click["p02"]',
            'click["p04"]',
            'click["p05"]',
        ]
        assert s.steps == 1

    def test_search_again_from_results(self):
        s = sim()
        s.step(parse_action('search["wool"]'))
        r = s.step(parse_action('search["coffee"]'))
        assert s.page is Page.RESULTS
        assert 'Results for "coffee":' in r.observation
        assert s.steps == 2


class TestProductPage:
    def product_page(self):
        s = sim()
        s.step(parse_action('search["hiking socks wool"]'))
        return s, s.step(parse_action('click["p03"]'))

    def test_observation_frozen(self):
        s, r = self.product_page()
        assert r.observation == (
            f"[product] Instruction: {INSTR}\n"
            "id=p03 | Merino Wool Socks | $12.50\n"
            "attrs: hiking, socks, wool\n"
            'options: color=green (click["green"]), size=large (click["large"])\n'
            "chosen: none"
        )
        assert [render_pattern(p) for p in r.available] == [
            'click["Buy Now"]',
            'click["green"]',
            'click["large"]',
            'click["Back"]',
        ]

    def test_option_click_selects_by_key(self):
        s, _ = self.product_page()
        r = s.step(parse_action('click["large"]'))
        assert s.chosen_options == {"size": "large"}
        assert "chosen: size=large" in r.observation

    def test_multiple_options_accumulate(self):
        s, _ = self.product_page()
        s.step(parse_action('click["large"]'))
        r = s.step(parse_action('click["green"]'))
        assert s.chosen_options == {"color": "green", "size": "large"}
        assert "chosen: color=green, size=large" in r.observation

    def test_reclick_is_idempotent(self):
        s, _ = self.product_page()
        s.step(parse_action('click["large"]'))
        s.step(parse_action('click["large"]'))
        assert s.chosen_options == {"size": "large"}

    def test_back_returns_to_results_and_clears(self):
        s, _ = self.product_page()
        s.step(parse_action('click["large"]'))
        r = s.step(parse_action('click["Back"]'))
        assert s.page is Page.RESULTS
        assert s.selected is None and s.chosen_options == {}
        assert 'Results for "hiking socks wool":' in r.observation

    def test_reentering_product_resets_chosen(self):
        s, _ = self.product_page()
        s.step(parse_action('click["large"]'))
        s.step(parse_action('click["Back"]'))
        s.step(parse_action('click["p03"]'))
        assert s.chosen_options == {}

    def test_options_none_rendering(self):
        catalog = (mini_product("q1", options=()),)
        s = ShopSim(catalog, mini_spec(attrs=("a",)))
        s.step(parse_action('search["thing"]'))
        r = s.step(parse_action('click["q1"]'))
        assert "options: none" in r.observation
        assert [render_pattern(p) for p in r.available] == ['click["Buy Now"]', 'click["Back"]']


class TestPurchase:
    def test_optimal_walkthrough_reward_one(self):
        s = sim()
        s.step(parse_action('search["hiking socks wool"]'))
        s.step(parse_action('click["p03"]'))
        s.step(parse_action('click["large"]'))
        r = s.step(parse_action('click["Buy Now"]'))
        assert r.done and r.reward == 1.0
        assert r.observation == "[done] Purchased p03 | reward: 1.0"
        assert r.available == ()
        assert s.steps == 4

    def test_buy_without_options_scores_partial(self):
        s = sim()
        s.step(parse_action('search["hiking socks wool"]'))
        s.step(parse_action('click["p03"]'))
        r = s.step(parse_action('click["Buy Now"]'))
        # 3 attrs + 0 options + price ok over denominator 5
        assert r.reward == (3 + 0 + 1) / 5

    def test_step_after_done_raises(self):
        s = sim()
        s.step(parse_action('search["hiking socks wool"]'))
        s.step(parse_action('click["p03"]'))
        s.step(parse_action('click["Buy Now"]'))
        with pytest.raises(EpisodeOver):
            s.step(NOOP)

    def test_every_fixture_task_is_winnable(self):
        for spec in TASKS:
            s = ShopSim(CATALOG, spec)
            query = " ".join(sorted(spec.target_attributes))
            r = s.step(Action(Verb.SEARCH, query))
            first = r.observation.splitlines()[2]
            pid = first.split("id=")[1].split(" ")[0]
            s.step(Action(Verb.CLICK, pid))
            for key in sorted(spec.target_options):
                s.step(Action(Verb.CLICK, spec.target_options[key]))
            r = s.step(Action(Verb.CLICK, "Buy Now"))
            assert r.reward == 1.0, f"{spec.id} best play scored {r.reward}"


class TestNoopAndCap:
    def test_noop_legal_everywhere_burns_a_step(self):
        s = sim()
        for _ in range(2):
            r = s.step(NOOP)
        assert s.page is Page.SEARCH_HOME and s.steps == 2
        s.step(parse_action('search["wool"]'))
        s.step(NOOP)
        assert s.page is Page.RESULTS and s.steps == 4

    def test_cap_ends_episode_with_zero_reward(self):
        s = sim()
        for _ in range(14):
            r = s.step(NOOP)
            assert not r.done
        r = s.step(NOOP)
        assert r.done and r.reward == 0.0
        assert r.observation == "[done] Step limit reached | reward: 0.0"
        assert s.steps == 15

    def test_purchase_on_the_cap_step_keeps_its_reward(self):
        s = sim(step_cap=3)
        s.step(parse_action('search["hiking socks wool"]'))
        s.step(parse_action('click["p03"]'))
        r = s.step(parse_action('click["Buy Now"]'))
        assert s.steps == 3 and r.done
        assert r.reward == (3 + 0 + 1) / 5

    def test_steps_never_exceed_cap(self):
        s = sim(step_cap=5)
        for _ in range(5):
            s.step(NOOP)
        assert s.steps == 5
        with pytest.raises(EpisodeOver):
            s.step(NOOP)


class TestIllegalActions:
    @pytest.mark.parametrize(
        "setup,bad",
        [
            ((), 'click["p03"]'),  # click on the search page
            (('search["wool"]',), 'click["p99"]'),  # unshown product id
            (('search["wool"]', 'click["p03"]'), 'search["again"]'),  # search on product page
            (('search["wool"]', 'click["p03"]'), 'click["huge"]'),  # unknown option value
            (('search["wool"]', 'click["p03"]'), 'click["p03"]'),  # product id on product page
        ],
    )
    def test_rejected_without_burning_a_step(self, setup, bad):
        s = sim()
        for step in setup:
            s.step(parse_action(step))
        before = (s.page, s.steps)
        with pytest.raises(IllegalAction):
            s.step(parse_action(bad))
        assert (s.page, s.steps) == before


class TestSoundness:
    def test_random_walks_accept_exactly_the_advertised_set(self):
        rng = random.Random(99)
        for walk in range(60):
            s = sim(task_id=f"t{rng.randint(1, 10):02d}")
            while not s.done:
                available = s.observe().available
                # anything not advertised (and not noop) must be rejected
                probe = Action(Verb.CLICK, f"nope-{walk}")
                if not any(p.matches(probe) for p in available):
                    with pytest.raises(IllegalAction):
                        s.step(probe)
                # every advertised pattern must be accepted
                choice = rng.choice(list(available) + [None])
                if choice is None:
                    s.step(NOOP)
                elif choice.wildcard:
                    s.step(Action(choice.verb, rng.choice(["wool socks", "coffee", "zzz"])))
                else:
                    s.step(Action(choice.verb, choice.arg))


class TestDeterminism:
    def test_identical_runs_identical_transcripts(self):
        plan = ['search["hiking socks wool"]', 'click["p03"]', 'click["large"]', "noop", 'click["Buy Now"]']

        def transcript():
            s = sim()
            out = [s.observe().observation]
            for a in plan:
                r = s.step(parse_action(a))
                out.append(r.observation)
                out.append(" | ".join(render_pattern(p) for p in r.available))
                out.append(repr(r.reward))
            return "\n".join(out).encode()

        assert transcript() == transcript()


# ─── construction and loading ───


class TestConstruction:
    def test_empty_catalog_rejected(self):
        with pytest.raises(EmptyCatalog):
            ShopSim((), mini_spec())

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError):
            ShopSim((mini_product("q1"), mini_product("q1")), mini_spec())

    def test_bad_caps_rejected(self):
        with pytest.raises(ValueError):
            ShopSim((mini_product(),), mini_spec(), step_cap=0)
        with pytest.raises(ValueError):
            ShopSim((mini_product(),), mini_spec(), top_k=0)

    def test_task_spec_needs_target_attributes(self):
        with pytest.raises(ValueError):
            mini_spec(attrs=())

    def test_product_validation(self):
        with pytest.raises(ValueError):
            mini_product(pid="")
        with pytest.raises(ValueError):
            mini_product(price=-1.0)


class TestLoading:
    def test_packaged_fixtures(self):
        assert len(CATALOG) == 12
        assert len(TASKS) == 10
        p03 = BY_ID["p03"]
        assert p03.title == "Merino Wool Socks"
        assert p03.attributes == frozenset({"hiking", "socks", "wool"})
        assert p03.options == {"size": "large", "color": "green"}
        assert p03.price == 12.5
        assert T01.price_cap == 20.0
        assert T01.target_options == {"size": "large"}

    def test_load_catalog_from_path(self, tmp_path):
        path = tmp_path / "cat.jsonl"
        path.write_text(
            json.dumps({"id": "x1", "title": "T", "attributes": ["a"], "options": {}, "price": 1.0})
            + "\n\n",
            encoding="utf-8",
        )
        (product,) = load_catalog(str(path))
        assert product.id == "x1"

    def test_load_tasks_from_path(self, tmp_path):
        path = tmp_path / "tasks.jsonl"
        path.write_text(
            json.dumps(
                {
                    "id": "t1",
                    "instruction": "buy it",
                    "target_attributes": ["a"],
                    "target_options": {},
                    "price_cap": 5,
                }
            )
            + "\n",
            encoding="utf-8",
        )
        (spec,) = load_tasks(str(path))
        assert spec.price_cap == 5.0

    @pytest.mark.parametrize(
        "row",
        [
            "not json",
            '["list"]',
            '{"id": "x", "title": "T", "attributes": ["a"], "options": {}}',
            '{"id": "x", "title": "T", "attributes": ["a"], "options": {}, "price": -2}',
            '{"id": "x", "title": "T", "attributes": ["a"], "options": {}, "price": true}',
            '{"id": "x", "title": "T", "attributes": [1], "options": {}, "price": 1}',
            '{"id": "x", "title": "", "attributes": ["a"], "options": {}, "price": 1}',
            '{"id": "x", "title": "T", "attributes": ["a"], "options": {"k": 3}, "price": 1}',
        ],
    )
    def test_catalog_schema_errors(self, tmp_path, row):
        path = tmp_path / "bad.jsonl"
        path.write_text(row + "\n", encoding="utf-8")
        with pytest.raises(SchemaError):
            load_catalog(str(path))

    def test_duplicate_ids_in_file(self, tmp_path):
        row = '{"id": "x", "title": "T", "attributes": ["a"], "options": {}, "price": 1}'
        path = tmp_path / "dup.jsonl"
        path.write_text(row + "\n" + row + "\n", encoding="utf-8")
        with pytest.raises(SchemaError):
            load_catalog(str(path))

    @pytest.mark.parametrize(
        "row",
        [
            '{"id": "t", "instruction": "i", "target_attributes": [], "target_options": {}, "price_cap": 1}',
            '{"id": "t", "instruction": "i", "target_attributes": ["a"], "target_options": {}, "price_cap": -1}',
            '{"id": "t", "instruction": "", "target_attributes": ["a"], "target_options": {}, "price_cap": 1}',
            '{"id": "t", "instruction": "i", "target_attributes": ["a"], "target_options": {"k": 1}, "price_cap": 1}',
        ],
    )
    def test_task_schema_errors(self, tmp_path, row):
        path = tmp_path / "bad.jsonl"
        path.write_text(row + "\n", encoding="utf-8")
        with pytest.raises(SchemaError):
            load_tasks(str(path))
