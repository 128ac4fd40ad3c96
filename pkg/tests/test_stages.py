import json

import pytest

from visa_agent import resources
from visa_agent.errors import SourceExhausted, StageFailure
from visa_agent.llm import MockBackend, MockScript
from visa_agent.model import FunctionId, GlobalMemory, append_memory
from visa_agent.prompts import render_memory_window
from visa_agent.stages import (
    DEFAULT_CORRECTION_RULES,
    FixtureSource,
    QueueSource,
    Transcript,
    ValidationResult,
    build_correction_prompt,
    build_reasoning_prompt,
    correct_and_validate,
    intake_transcript,
    mentions_known_vocabulary,
    parse_select_command,
    reason_agent,
    select_command_for,
)


def backend_with(match, response) -> MockBackend:
    script = MockScript()
    script.add(match, json.dumps(response) if not isinstance(response, str) else response)
    return MockBackend(script)


class TestIntake:
    def test_fixture_replays_raw_commands(self):
        source = FixtureSource(["Show the city views"])
        t = intake_transcript(source)
        assert t.text == "Show the city views"
        assert t.source == "fixture"

    def test_silent_clip_is_distinct_from_empty(self):
        t = intake_transcript(FixtureSource([None]))
        assert t.text is None

    def test_exhausted_fixture_raises(self):
        source = FixtureSource([])
        with pytest.raises(SourceExhausted):
            intake_transcript(source)

    def test_queue_source_push_pop(self):
        q = QueueSource()
        q.push("Coronal plus 100")
        assert intake_transcript(q).text == "Coronal plus 100"
        with pytest.raises(SourceExhausted):
            intake_transcript(q)

    def test_stdin_source_blank_line_is_silent(self):
        import io

        from visa_agent.stages import StdinSource

        source = StdinSource(io.StringIO("Zoom out\n\n"))
        assert intake_transcript(source).text == "Zoom out"
        assert intake_transcript(source).text is None
        with pytest.raises(SourceExhausted):
            intake_transcript(source)

    def test_subprocess_stt_source_parses_json_text(self):
        import sys

        from visa_agent.stages import SubprocessSttSource

        source = SubprocessSttSource(
            [sys.executable, "-c", "print('{\"text\": \"Show the CT views\"}')"]
        )
        t = intake_transcript(source)
        assert t.text == "Show the CT views"
        assert t.source == "external_stt"

    def test_http_stt_source_unreachable_is_transport_error(self):
        from visa_agent.errors import TransportError
        from visa_agent.stages import HttpSttSource

        source = HttpSttSource("http://127.0.0.1:9/text", timeout_s=0.5)
        with pytest.raises(TransportError):
            intake_transcript(source)


class TestCorrectAndValidate:
    def test_city_corrected_to_ct(self):
        backend = backend_with(
            'Transcribed command: "Show the city views"',
            {"revised": "Show the CT views", "valid": True},
        )
        out = correct_and_validate(
            Transcript("Show the city views"), GlobalMemory(), backend
        )
        assert out == ValidationResult("Show the CT views", True)

    def test_absent_text_selects_last_agent(self):
        mem = GlobalMemory()
        append_memory(mem, "Show CT views", FunctionId.IV_AGENT)
        backend = MockBackend(MockScript())  # must not be consulted
        out = correct_and_validate(Transcript(None), mem, backend)
        assert out == ValidationResult("Select image viewer agent", True)
        assert backend.requests == []

    def test_absent_text_with_no_history_is_invalid(self):
        out = correct_and_validate(Transcript(None), GlobalMemory(), MockBackend(MockScript()))
        assert out.valid is False

    def test_unsupported_command_invalid(self):
        backend = backend_with(
            'Transcribed command: "Prepare the stapler"',
            {"revised": "Prepare the stapler", "valid": False},
        )
        out = correct_and_validate(Transcript("Prepare the stapler"), GlobalMemory(), backend)
        assert out.valid is False

    def test_backstop_overrides_model_validity(self):
        # Model wrongly says valid; no known term appears, so the rule flips it.
        backend = backend_with(
            'Transcribed command: "Prepare the stapler"',
            {"revised": "Prepare the stapler", "valid": True},
        )
        out = correct_and_validate(
            Transcript("Prepare the stapler"),
            GlobalMemory(),
            backend,
            vocabulary=resources.known_vocabulary(),
        )
        assert out.valid is False

    def test_parse_error_keeps_raw_and_invalidates(self):
        backend = backend_with("Transcribed command", "not json at all")
        out = correct_and_validate(Transcript("Show the CT views"), GlobalMemory(), backend)
        assert out == ValidationResult("Show the CT views", False)

    def test_prompt_carries_rules_memory_and_raw(self):
        mem = GlobalMemory()
        append_memory(mem, "Coronal plus 100", FunctionId.IV_AGENT)
        prompt = build_correction_prompt("Show the city views", mem, DEFAULT_CORRECTION_RULES)
        assert '"city" -> "CT"' in prompt
        assert render_memory_window(mem) in prompt
        assert 'Transcribed command: "Show the city views"' in prompt
        assert "Validation rules:" in prompt

    def test_identity_on_already_clean_commands(self):
        backend = backend_with(
            'Transcribed command: "Sagittal minus 30"',
            {"revised": "Sagittal minus 30", "valid": True},
        )
        out = correct_and_validate(Transcript("Sagittal minus 30"), GlobalMemory(), backend)
        assert out.revised == "Sagittal minus 30"


class TestKnownVocabulary:
    def test_known_hard_unsupported_commands_are_documented(self):
        # These three read like patient-data requests; the validator is not
        # required to catch them, so no validity is asserted here.
        hard = [
            "Is the patient's vital sign stable?",
            "What is the current CO2 pressure?",
            "How long since the frozen section was sent?",
        ]
        for text in hard:
            assert isinstance(text, str)

    def test_vocabulary_word_boundaries(self):
        vocab = ("ct", "age")
        assert mentions_known_vocabulary("show the CT views", vocab)
        assert not mentions_known_vocabulary("doctor collect page", vocab)


class TestReasonAgent:
    def test_ir_choice(self):
        backend = backend_with(
            ('[stage: command_reasoning]', 'Command: "Show patient information"'),
            {"agent": "ir_agent"},
        )
        choice = reason_agent(
            ValidationResult("Show patient information", True), GlobalMemory(), backend
        )
        assert choice.agent is FunctionId.IR_AGENT

    def test_ambiguous_zoom_resolved_from_memory(self):
        mem = GlobalMemory()
        append_memory(mem, "Rotate to the right", FunctionId.AR_AGENT)
        backend = backend_with(
            ('Command: "Zoom out"', "-> ar_agent"), {"agent": "ar_agent"}
        )
        choice = reason_agent(ValidationResult("Zoom out", True), mem, backend)
        assert choice.agent is FunctionId.AR_AGENT

    def test_iv_choice(self):
        backend = backend_with('Command: "Coronal plus 100"', {"agent": "iv_agent"})
        choice = reason_agent(ValidationResult("Coronal plus 100", True), GlobalMemory(), backend)
        assert choice.agent is FunctionId.IV_AGENT

    def test_parse_error_becomes_stage_failure(self):
        backend = backend_with("Command:", "garbage")
        with pytest.raises(StageFailure):
            reason_agent(ValidationResult("Zoom out", True), GlobalMemory(), backend)

    def test_unknown_agent_name_fails(self):
        backend = backend_with("Command:", {"agent": "scheduler_agent"})
        with pytest.raises(StageFailure):
            reason_agent(ValidationResult("Zoom out", True), GlobalMemory(), backend)

    def test_invalid_input_rejected(self):
        with pytest.raises(ValueError):
            reason_agent(ValidationResult("x", False), GlobalMemory(), MockBackend(MockScript()))

    def test_select_command_short_circuits_model(self):
        backend = MockBackend(MockScript())  # strict: any chat would raise
        choice = reason_agent(
            ValidationResult("Select anatomy rendering agent", True), GlobalMemory(), backend
        )
        assert choice.agent is FunctionId.AR_AGENT
        assert backend.requests == []

    def test_prompt_memory_window_is_byte_exact(self):
        mem = GlobalMemory()
        append_memory(mem, "Coronal plus 100", FunctionId.IV_AGENT)
        append_memory(mem, "Turn on RLL", FunctionId.AR_AGENT)
        rendered = render_memory_window(mem)
        assert rendered in build_reasoning_prompt("Zoom in", mem)
        assert rendered in build_correction_prompt("Zoom in", mem, DEFAULT_CORRECTION_RULES)


class TestSelectParsing:
    def test_round_trip_for_all_agents(self):
        for agent in (FunctionId.IR_AGENT, FunctionId.IV_AGENT, FunctionId.AR_AGENT):
            assert parse_select_command(select_command_for(agent)) is agent

    def test_non_select_text(self):
        assert parse_select_command("Show patient information") is None
        assert parse_select_command("Select the best option") is None
