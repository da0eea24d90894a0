"""Task manager: lifecycle state machine, noop cutoff, episode sweep."""

import pytest

from agentloop.actions import NOOP, parse_action
from agentloop.decision import Decision
from agentloop.tasks import (
    DuplicateOrigin,
    NotActive,
    Task,
    TaskKind,
    TaskManager,
    TaskState,
)
from agentloop.types import Event, SimClock, Source, Timestamp, make_counter


def mk_event(eid="e1"):
    return Event(id=eid, ts=Timestamp(1, 0), source=Source.CLIENT, intent="buy socks")


def mk_decision(event_id="e1", action=None):
    return Decision(
        event_id=event_id,
        chosen=action if action is not None else NOOP,
        candidate_count=1,
        memory_version=0,
        decided_at=Timestamp(2, 0),
    )


def manager(**kw):
    kw.setdefault("clock", SimClock())
    kw.setdefault("id_factory", make_counter("t"))
    return TaskManager(**kw)


CLICK = parse_action('click["p03"]')


class TestSpawn:
    def test_spawn_registers_active_task(self):
        m = manager()
        t = m.spawn_task("buy wool socks", TaskKind.SHORT_TERM, mk_event())
        assert t.id == "t1"
        assert t.state is TaskState.ACTIVE
        assert t.origin_event == "e1"
        assert t.history == []
        assert m.get("t1") is t

    def test_duplicate_origin_rejected_while_active(self):
        m = manager()
        m.spawn_task("goal", TaskKind.SHORT_TERM, mk_event())
        with pytest.raises(DuplicateOrigin):
            m.spawn_task("another goal", TaskKind.LONG_TERM, mk_event())

    def test_origin_reusable_after_terminal(self):
        m = manager()
        t = m.spawn_task("goal", TaskKind.SHORT_TERM, mk_event())
        m.complete_task(t.id)
        t2 = m.spawn_task("retry goal", TaskKind.SHORT_TERM, mk_event())
        assert t2.state is TaskState.ACTIVE

    def test_empty_goal_rejected(self):
        with pytest.raises(ValueError):
            manager().spawn_task("", TaskKind.SHORT_TERM, mk_event())

    def test_noop_cutoff_validated(self):
        with pytest.raises(ValueError):
            TaskManager(noop_cutoff=0)


class TestNoteDecision:
    def test_appends_history_and_resets_streak(self):
        m = manager()
        t = m.spawn_task("goal", TaskKind.SHORT_TERM, mk_event())
        m.note_decision(t.id, mk_decision("e1"))
        updated = m.note_decision(t.id, mk_decision("e2", CLICK))
        assert updated.history == ["e1", "e2"]
        assert updated.noop_streak == 0
        assert updated.state is TaskState.ACTIVE

    def test_three_consecutive_noops_fail_the_task(self):
        m = manager()
        t = m.spawn_task("goal", TaskKind.SHORT_TERM, mk_event())
        m.note_decision(t.id, mk_decision("e1"))
        m.note_decision(t.id, mk_decision("e2"))
        updated = m.note_decision(t.id, mk_decision("e3"))
        assert updated.state is TaskState.FAILED
        assert len(updated.history) == 3

    def test_non_noop_interrupts_the_streak(self):
        m = manager()
        t = m.spawn_task("goal", TaskKind.SHORT_TERM, mk_event())
        for eid, action in [("e1", None), ("e2", None), ("e3", CLICK), ("e4", None), ("e5", None)]:
            updated = m.note_decision(t.id, mk_decision(eid, action))
        assert updated.state is TaskState.ACTIVE
        assert updated.noop_streak == 2

    def test_custom_cutoff(self):
        m = manager(noop_cutoff=1)
        t = m.spawn_task("goal", TaskKind.SHORT_TERM, mk_event())
        assert m.note_decision(t.id, mk_decision()).state is TaskState.FAILED

    def test_unknown_task_rejected(self):
        with pytest.raises(NotActive):
            manager().note_decision("t99", mk_decision())

    def test_decision_on_completed_task_rejected(self):
        m = manager()
        t = m.spawn_task("goal", TaskKind.SHORT_TERM, mk_event())
        m.complete_task(t.id)
        with pytest.raises(NotActive):
            m.note_decision(t.id, mk_decision())


class TestStateMachine:
    def terminal_states(self):
        return [TaskState.COMPLETED, TaskState.FAILED, TaskState.EXPIRED]

    def task_in_state(self, m, state):
        t = m.spawn_task("goal", TaskKind.SHORT_TERM, mk_event(f"e-{state.value}"))
        if state is TaskState.COMPLETED:
            m.complete_task(t.id)
        elif state is TaskState.FAILED:
            m.fail_task(t.id)
        elif state is TaskState.EXPIRED:
            m.sweep_episode()
        return t

    def test_no_transition_out_of_any_terminal_state(self):
        for state in self.terminal_states():
            for op in ("complete_task", "fail_task", "note"):
                m = manager()
                t = self.task_in_state(m, state)
                before = (t.state, list(t.history))
                with pytest.raises(NotActive):
                    if op == "note":
                        m.note_decision(t.id, mk_decision())
                    else:
                        getattr(m, op)(t.id)
                assert (t.state, list(t.history)) == before

    def test_sweep_never_touches_terminal_tasks(self):
        m = manager()
        done = self.task_in_state(m, TaskState.COMPLETED)
        m.sweep_episode()
        assert done.state is TaskState.COMPLETED

    def test_complete_and_fail_transitions(self):
        m = manager()
        a = m.spawn_task("a", TaskKind.SHORT_TERM, mk_event("e1"))
        b = m.spawn_task("b", TaskKind.SHORT_TERM, mk_event("e2"))
        assert m.complete_task(a.id).state is TaskState.COMPLETED
        assert m.fail_task(b.id).state is TaskState.FAILED


class TestSweep:
    def test_sweep_expires_active_short_term_only(self):
        m = manager()
        short = m.spawn_task("short goal", TaskKind.SHORT_TERM, mk_event("e1"))
        long_ = m.spawn_task("long goal", TaskKind.LONG_TERM, mk_event("e2"))
        swept = m.sweep_episode()
        assert swept == (short.id,)
        assert short.state is TaskState.EXPIRED
        assert long_.state is TaskState.ACTIVE

    def test_second_sweep_is_a_noop(self):
        m = manager()
        m.spawn_task("goal", TaskKind.SHORT_TERM, mk_event())
        m.sweep_episode()
        assert m.sweep_episode() == ()


class TestActiveContext:
    def test_empty(self):
        assert manager().active_context() == []

    def test_newest_first_and_terminal_excluded(self):
        m = manager()
        a = m.spawn_task("first goal", TaskKind.SHORT_TERM, mk_event("e1"))
        b = m.spawn_task("second goal", TaskKind.LONG_TERM, mk_event("e2"))
        c = m.spawn_task("third goal", TaskKind.SHORT_TERM, mk_event("e3"))
        m.complete_task(b.id)
        m.note_decision(c.id, mk_decision("e9", CLICK))
        assert m.active_context() == [
            "third goal | short_term | 1 decisions so far",
            "first goal | short_term | 0 decisions so far",
        ]

    def test_insertion_breaks_created_at_ties(self):
        class FrozenClock:
            def now_nanos(self):
                return 5

        m = TaskManager(clock=FrozenClock(), id_factory=make_counter("t"))
        m.spawn_task("older", TaskKind.SHORT_TERM, mk_event("e1"))
        m.spawn_task("newer", TaskKind.SHORT_TERM, mk_event("e2"))
        assert [s.split(" | ")[0] for s in m.active_context()] == ["newer", "older"]

    def test_summary_format(self):
        t = Task(
            id="t1",
            goal="buy socks",
            kind=TaskKind.LONG_TERM,
            state=TaskState.ACTIVE,
            created_at=Timestamp(1, 0),
            origin_event="e1",
            history=["e1", "e2", "e3"],
        )
        assert t.summary() == "buy socks | long_term | 3 decisions so far"
