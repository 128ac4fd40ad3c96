import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from visa_agent.errors import MockMiss, ParseError, TransportError
from visa_agent.llm import (
    ChatRequest,
    LiveBackend,
    MockBackend,
    MockScript,
    extract_json_object,
    parse_labeled_json,
    parse_probability_json,
)
from visa_agent.model import FunctionId


def req(text: str) -> ChatRequest:
    return ChatRequest(system_prompt="", user_prompt=text)


class TestMockBackend:
    def test_scripted_echo(self):
        script = MockScript()
        script.add("orchestrator-step-1", '{"stt": 0.95, "end": 0.05}')
        backend = MockBackend(script)
        out = backend.chat(req("please do orchestrator-step-1 now"))
        assert out.text == '{"stt": 0.95, "end": 0.05}'
        assert out.latency_ms >= 0

    def test_strict_miss_raises(self):
        backend = MockBackend(MockScript())
        with pytest.raises(MockMiss):
            backend.chat(req("anything"))

    def test_strict_double_match_raises(self):
        script = MockScript()
        script.add("x", "a")
        script.add("x", "b")
        with pytest.raises(MockMiss):
            MockBackend(script).chat(req("x"))

    def test_non_strict_returns_empty_on_miss(self):
        backend = MockBackend(MockScript(strict=False))
        assert backend.chat(req("nothing matches")).text == ""

    def test_once_entries_are_consumed_in_order(self):
        script = MockScript(strict=False)
        script.add("same", "first", once=True)
        script.add("same", "second")
        backend = MockBackend(script)
        assert backend.chat(req("same")).text == "first"
        assert backend.chat(req("same")).text == "second"

    def test_deterministic_for_identical_sequences(self):
        def run():
            script = MockScript()
            script.add("a", "ra")
            script.add("b", "rb")
            backend = MockBackend(script)
            return [backend.chat(req(t)).text for t in ("a", "b", "a")]

        assert run() == run()

    def test_multi_substring_matchers(self):
        script = MockScript()
        script.add(("alpha", "beta"), "both")
        backend = MockBackend(script)
        assert backend.chat(req("alpha ... beta")).text == "both"
        with pytest.raises(MockMiss):
            backend.chat(req("alpha only"))

    def test_jsonl_round_trip(self, tmp_path):
        script = MockScript()
        script.add(["m1", "m2"], "r1")
        script.add("m3", "r2", once=True)
        path = tmp_path / "script.jsonl"
        script.to_jsonl(str(path))
        loaded = MockScript.from_jsonl(str(path))
        assert [e.match for e in loaded.entries] == [("m1", "m2"), ("m3",)]
        assert loaded.entries[1].once


class TestLiveBackend:
    def test_unreachable_endpoint_raises_transport_error(self):
        backend = LiveBackend(url="http://127.0.0.1:9/v1/chat/completions", timeout_s=0.5)
        with pytest.raises(TransportError):
            backend.chat(req("hello"))

    def test_env_vars_configure_endpoint_and_model(self, monkeypatch):
        monkeypatch.setenv("VISA_LLM_URL", "http://example.local/v1/chat/completions")
        monkeypatch.setenv("VISA_LLM_MODEL", "chat-27b")
        backend = LiveBackend()
        assert backend.url == "http://example.local/v1/chat/completions"
        assert backend.model == "chat-27b"

    def test_explicit_args_beat_env(self, monkeypatch):
        monkeypatch.setenv("VISA_LLM_URL", "http://example.local/x")
        backend = LiveBackend(url="http://other/y", model="m")
        assert backend.url == "http://other/y"
        assert backend.model == "m"


class TestExtractJson:
    def test_plain_object(self):
        assert extract_json_object('{"a": 1}') == {"a": 1}

    def test_prose_wrapped(self):
        assert extract_json_object('Here is my answer: {"stt": 1.2} ok?') == {"stt": 1.2}

    def test_code_fence_stripped_first(self):
        text = 'intro\n```json\n{"a": {"b": 2}}\n```\ntrailing {"c": 3}'
        assert extract_json_object(text) == {"a": {"b": 2}}

    def test_first_balanced_object_wins(self):
        assert extract_json_object('{"a": 1} {"b": 2}') == {"a": 1}

    def test_braces_inside_strings(self):
        assert extract_json_object('{"a": "}{"}') == {"a": "}{"}

    def test_no_json_raises(self):
        with pytest.raises(ParseError):
            extract_json_object("no json here")


class TestParseProbabilityJson:
    def test_direct_parse(self):
        out = parse_probability_json('{"stt": 0.9, "end": 0.1}')
        assert out == {FunctionId.STT: 0.9, FunctionId.END: 0.1}

    def test_clamps_out_of_range(self):
        out = parse_probability_json('Here is my answer: {"stt": 1.2}')
        assert out == {FunctionId.STT: 1.0}
        assert parse_probability_json('{"stt": -0.4}') == {FunctionId.STT: 0.0}

    def test_unknown_keys_dropped(self):
        out = parse_probability_json('{"stt": 0.5, "bogus": 0.9}')
        assert out == {FunctionId.STT: 0.5}

    def test_non_numeric_values_dropped(self):
        out = parse_probability_json('{"stt": "high", "end": 0.2}')
        assert out == {FunctionId.END: 0.2}

    def test_duplicate_keys_last_wins(self):
        out = parse_probability_json('{"stt": 0.2, "stt": 0.7}')
        assert out == {FunctionId.STT: 0.7}

    def test_missing_keys_not_filled(self):
        out = parse_probability_json('{"stt": 0.9}')
        assert FunctionId.END not in out

    def test_parse_error(self):
        with pytest.raises(ParseError):
            parse_probability_json("no json here")

    @given(
        st.dictionaries(
            st.sampled_from([f.value for f in FunctionId]),
            st.floats(min_value=-5, max_value=5, allow_nan=False),
            max_size=8,
        )
    )
    def test_values_always_in_unit_interval(self, probs):
        out = parse_probability_json(json.dumps(probs))
        assert set(out) <= set(FunctionId)
        assert all(0.0 <= v <= 1.0 for v in out.values())


class TestParseLabeledJson:
    def test_correction_schema(self):
        out = parse_labeled_json(
            '{"revised": "Show CT views", "valid": true}', required=["revised", "valid"]
        )
        assert out == {"revised": "Show CT views", "valid": True}

    def test_agent_schema(self):
        out = parse_labeled_json('{"agent": "iv_agent"}', required=["agent"])
        assert out == {"agent": "iv_agent"}

    def test_missing_required_field(self):
        with pytest.raises(ParseError):
            parse_labeled_json('{"revised": "x"}', required=["revised", "valid"])

    def test_optional_fields_pass_through(self):
        out = parse_labeled_json(
            '{"agent": "ir_agent", "rationale": "age question"}',
            required=["agent"],
            optional=["rationale"],
        )
        assert out["rationale"] == "age question"
