import pytest
from hypothesis import given
from hypothesis import strategies as st

from visa_agent.model import (
    FUNCTION_ORDER,
    ClipRef,
    FunctionId,
    GlobalMemory,
    SessionState,
    Status,
    append_memory,
    memory_window,
)


class TestClipRef:
    def test_timing_is_fixed_by_index(self):
        clip = ClipRef(3)
        assert clip.start_s == 30.0
        assert clip.duration_s == 10.0

    def test_negative_index_rejected(self):
        with pytest.raises(ValueError):
            ClipRef(-1)


class TestMemoryWindow:
    def test_empty_history(self):
        assert memory_window(GlobalMemory(), 3) == []

    def test_fewer_entries_than_window(self):
        mem = GlobalMemory()
        append_memory(mem, "Show CT views", FunctionId.IV_AGENT)
        assert memory_window(mem, 3) == [("Show CT views", FunctionId.IV_AGENT)]

    def test_five_entries_window_three(self):
        # Hand enumeration: entries 3, 4, 5 survive, oldest of them first.
        mem = GlobalMemory()
        for i in range(1, 6):
            append_memory(mem, f"command {i}", FunctionId.IR_AGENT)
        assert memory_window(mem, 3) == [
            ("command 3", FunctionId.IR_AGENT),
            ("command 4", FunctionId.IR_AGENT),
            ("command 5", FunctionId.IR_AGENT),
        ]

    def test_window_size_must_be_positive(self):
        with pytest.raises(ValueError):
            memory_window(GlobalMemory(), 0)


class TestAppendMemory:
    def test_append_to_empty(self):
        mem = GlobalMemory()
        append_memory(mem, "Reset", FunctionId.AR_AGENT)
        assert len(mem.history) == 1

    def test_order_preserved(self):
        mem = GlobalMemory()
        append_memory(mem, "first", FunctionId.IR_AGENT)
        append_memory(mem, "second", FunctionId.IV_AGENT)
        assert [t for t, _ in mem.history] == ["first", "second"]

    def test_append_ten_window_returns_last_three(self):
        mem = GlobalMemory()
        for i in range(1, 11):
            append_memory(mem, f"c{i}", FunctionId.AR_AGENT)
        assert [t for t, _ in memory_window(mem, 3)] == ["c8", "c9", "c10"]

    def test_empty_text_rejected(self):
        with pytest.raises(ValueError):
            append_memory(GlobalMemory(), "", FunctionId.IR_AGENT)

    @given(st.lists(st.text(min_size=1), max_size=12))
    def test_window_equals_tail_of_appends(self, texts):
        mem = GlobalMemory()
        for t in texts:
            append_memory(mem, t, FunctionId.IV_AGENT)
        expected = [(t, FunctionId.IV_AGENT) for t in texts[-3:]]
        assert memory_window(mem, 3) == expected


class TestFunctionOrder:
    def test_canonical_order_total_and_stable(self):
        assert len(FUNCTION_ORDER) == 8
        assert len(set(FUNCTION_ORDER)) == 8
        assert FUNCTION_ORDER[0] is FunctionId.REAL_TIME_AUDIO
        assert FUNCTION_ORDER[-1] is FunctionId.END
        assert tuple(FunctionId) == FUNCTION_ORDER


class TestSessionState:
    def test_advance_clip_resets_counters_and_snapshots(self):
        state = SessionState()
        state.invalid_cycles = 2
        state.agent_states[FunctionId.IR_AGENT] = {"y": [1]}
        local_before = state.local
        state.advance_clip()
        assert state.clip.index == 1
        assert state.invalid_cycles == 0
        assert state.status is Status.IDLE
        assert local_before.agent_state_snapshot is not None

    def test_paper_statuses_are_byte_exact(self):
        assert Status.NO_AUDIO.value == "No audio recorded"
        assert Status.INVALID.value == "Last command invalid, need new input"
        assert Status.AGENT_DONE.value == "Agent completed, workflow finished"
