"""Build deterministic mock scripts from dataset gold annotations.

The generated script answers every chat the workflow makes while processing
dataset commands: orchestrator planning keyed on the status line, correction
and reasoning keyed on the quoted command text (with the memory window
disambiguating commands that read the same for different agents), and agent
action prompts keyed per stage tag.
"""

from __future__ import annotations

import json

from .evaluation import CommandRecord
from .llm import MockScript
from .model import FunctionId, Status
from .prompts import (
    TAG_AR_ACTION,
    TAG_COMMAND_REASONING,
    TAG_CORRECT_VALIDATE,
    TAG_IR_ACTION,
    TAG_IV_ACTION,
    TAG_ORCHESTRATOR,
)

AGENT_ACTION_TAGS = {
    FunctionId.IR_AGENT: TAG_IR_ACTION,
    FunctionId.IV_AGENT: TAG_IV_ACTION,
    FunctionId.AR_AGENT: TAG_AR_ACTION,
}

_FIELD_PROB = 0.97


def status_line(status: Status) -> str:
    return f'Current status: "{status.value}"'


def add_status_entries(script: MockScript) -> None:
    """Planning answers for every orchestrator consultation point."""
    plain = {
        Status.IDLE: {"real_time_audio": 0.95, "end": 0.05},
        Status.AUDIO_RECORDED: {"stt": 0.96, "end": 0.04},
        Status.NO_AUDIO: {"correct_validate": 0.9, "real_time_audio": 0.1},
        Status.TRANSCRIBED: {"correct_validate": 0.93, "stt": 0.07},
        Status.VALID: {"command_reasoning": 0.94, "end": 0.06},
        Status.INVALID: {"real_time_audio": 0.9, "end": 0.1},
        Status.AGENT_DONE: {"end": 0.97, "real_time_audio": 0.03},
    }
    for status, probs in plain.items():
        script.add(
            (TAG_ORCHESTRATOR, status_line(status)),
            json.dumps(probs),
        )
    for agent in (FunctionId.IR_AGENT, FunctionId.IV_AGENT, FunctionId.AR_AGENT):
        script.add(
            (TAG_ORCHESTRATOR, status_line(Status.AGENT_SELECTED), f"Active agent: {agent.value}"),
            json.dumps({agent.value: 0.92, "end": 0.08}),
        )


def correction_response(record: CommandRecord) -> str:
    return json.dumps({"revised": record.gold_revised, "valid": True})


def reasoning_response(record: CommandRecord) -> str:
    return json.dumps({"agent": record.gold_agent.value})


def action_response(record: CommandRecord) -> str:
    params = record.gold_params
    if record.agent_gold == "ir":
        fields = {cid: _FIELD_PROB for cid in params.get("fields", [])}
        return json.dumps({"action": record.gold_action, "fields": fields})
    if record.agent_gold == "iv":
        body = {"action": record.gold_action}
        body.update(params)
        return json.dumps(body)
    body = {"action": record.gold_action}
    body.update(params)
    return json.dumps(body)


def add_record_entries(
    script: MockScript, record: CommandRecord, ambiguous: set[str] = frozenset()
) -> None:
    existing = {(e.match, e.response) for e in script.entries}

    def add_once(match: tuple[str, ...], response: str) -> None:
        if (match, response) in existing:
            return
        conflicting = [e for e in script.entries if e.match == match and e.response != response]
        if conflicting:
            raise ValueError(
                f"mock script conflict: matcher {match} already answers differently"
            )
        script.add(match, response)
        existing.add((match, response))

    # Matchers anchor on the "Command:" prompt lines so quoted phrases in the
    # surrounding instructions can never collide with a command matcher.
    add_once(
        (TAG_CORRECT_VALIDATE, f'Transcribed command: "{record.raw_text}"'),
        correction_response(record),
    )
    if record.gold_revised != record.raw_text:
        # Already-clean input corrects to itself (service sessions type the
        # clean form directly).
        add_once(
            (TAG_CORRECT_VALIDATE, f'Transcribed command: "{record.gold_revised}"'),
            correction_response(record),
        )
    # Texts shared across agents ("Zoom out") resolve by the most recent
    # agent in the memory window, mirroring how the model would reason.
    reasoning_match = [TAG_COMMAND_REASONING, f'Command: "{record.gold_revised}"']
    if record.gold_revised in ambiguous:
        reasoning_match.append(f"Most recent agent: {record.gold_agent.value}")
    add_once(tuple(reasoning_match), reasoning_response(record))
    add_once(
        (AGENT_ACTION_TAGS[record.gold_agent], f'Command: "{record.gold_revised}"'),
        action_response(record),
    )


def ambiguous_texts(records: list[CommandRecord]) -> set[str]:
    """Revised texts that different records assign to different agents."""
    agents_by_text: dict[str, set[str]] = {}
    for record in records:
        agents_by_text.setdefault(record.gold_revised, set()).add(record.agent_gold)
    return {text for text, agents in agents_by_text.items() if len(agents) > 1}


def build_mock_script(records: list[CommandRecord], strict: bool = True) -> MockScript:
    """Full script covering the whole dataset plus the planning entries."""
    script = MockScript(strict=strict)
    add_status_entries(script)
    ambiguous = ambiguous_texts(records)
    for record in records:
        add_record_entries(script, record, ambiguous)
    return script
