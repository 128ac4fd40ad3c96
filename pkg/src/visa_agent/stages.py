"""Workflow stages between audio capture and agent hand-off.

The transcript intake adapter stands in for the audio/STT pipeline: fixture
sources replay dataset commands (including their injected transcription
errors), a queue source backs the HTTP service, and external adapters can
pull text from another process or endpoint.
"""

from __future__ import annotations

import json
import re
import subprocess
from collections import deque
from dataclasses import dataclass
from typing import Any, Iterable, Protocol

import requests

from .errors import ParseError, SourceExhausted, StageFailure, TransportError
from .llm import ChatBackend, ChatRequest, parse_labeled_json
from .model import AGENT_DISPLAY_NAMES, TASK_AGENTS, FunctionId, GlobalMemory
from .prompts import (
    AGENT_DESCRIPTIONS,
    TAG_COMMAND_REASONING,
    TAG_CORRECT_VALIDATE,
    quoted,
    render_memory_window,
)


@dataclass(frozen=True)
class Transcript:
    """One clip's worth of heard text; ``text=None`` means a silent clip."""

    text: str | None
    speaker: str | None = None
    source: str = "fixture"


@dataclass(frozen=True)
class ValidationResult:
    revised: str
    valid: bool


@dataclass(frozen=True)
class AgentChoice:
    agent: FunctionId
    rationale: str | None = None


class TranscriptSource(Protocol):
    def next_transcript(self) -> Transcript: ...


class FixtureSource:
    """Replays a fixed list of commands; None entries are silent clips."""

    def __init__(self, texts: Iterable[str | None], speaker: str | None = None):
        self._queue = deque(texts)
        self._speaker = speaker

    def next_transcript(self) -> Transcript:
        if not self._queue:
            raise SourceExhausted("fixture source has no more commands")
        return Transcript(text=self._queue.popleft(), speaker=self._speaker, source="fixture")


class QueueSource:
    """Push-driven source used by the HTTP service (one command per request)."""

    def __init__(self) -> None:
        self._queue: deque[str | None] = deque()

    def push(self, text: str | None) -> None:
        self._queue.append(text)

    def next_transcript(self) -> Transcript:
        if not self._queue:
            raise SourceExhausted("no pending command for this clip")
        return Transcript(text=self._queue.popleft(), source="http")


class StdinSource:
    """Reads one command per line; a blank line is a silent clip."""

    def __init__(self, stream: Any) -> None:
        self._stream = stream

    def next_transcript(self) -> Transcript:
        line = self._stream.readline()
        if line == "":
            raise SourceExhausted("stdin closed")
        text = line.strip()
        return Transcript(text=text or None, source="stdin")


class HttpSttSource:
    """Pulls {"text": ...} from an external speech-to-text endpoint."""

    def __init__(self, url: str, timeout_s: float = 30.0):
        self.url = url
        self.timeout_s = timeout_s

    def next_transcript(self) -> Transcript:
        try:
            resp = requests.get(self.url, timeout=self.timeout_s)
            resp.raise_for_status()
            payload = resp.json()
        except (requests.RequestException, ValueError) as exc:
            raise TransportError(f"stt endpoint {self.url} failed: {exc}") from exc
        text = payload.get("text")
        return Transcript(text=text if text else None, source="external_stt")


class SubprocessSttSource:
    """Runs a command whose stdout is the transcript ({"text": ...} or raw)."""

    def __init__(self, argv: list[str], timeout_s: float = 60.0):
        self.argv = argv
        self.timeout_s = timeout_s

    def next_transcript(self) -> Transcript:
        try:
            out = subprocess.run(
                self.argv, capture_output=True, timeout=self.timeout_s, check=True, text=True
            ).stdout.strip()
        except (OSError, subprocess.SubprocessError) as exc:
            raise TransportError(f"stt subprocess failed: {exc}") from exc
        if not out:
            return Transcript(text=None, source="external_stt")
        try:
            payload = json.loads(out)
            text = payload.get("text") if isinstance(payload, dict) else out
        except json.JSONDecodeError:
            text = out
        return Transcript(text=text if text else None, source="external_stt")


def intake_transcript(source: TranscriptSource) -> Transcript:
    """Next transcript for the current clip; SourceExhausted when dry."""
    return source.next_transcript()


SELECT_TEMPLATE = "Select {name}"
_SELECT_RE = re.compile(r"^select\s+(.+?)\s*$", re.IGNORECASE)

# Phrases shown in the correction prompt as known transcription confusions.
DEFAULT_CORRECTION_RULES: dict[str, str] = {
    "city": "CT",
    "corona": "coronal",
    "covid": "coronal",
    "long": "lung",
    "2": "to",
    "write": "right",
    "june": "zoom",
    "at": "add",
}

VALIDATION_RULES = """Validation rules:
- A command is valid only if it asks for patient data fields, CT plane movement
  or zoom, or 3D anatomy structures, viewpoints, rotation, or zoom.
- Commands about surgical equipment, staff, supplies, or anything outside the
  supported data controls are invalid.
- Keep the command's meaning; only fix transcription mistakes."""


def select_command_for(agent: FunctionId) -> str:
    return SELECT_TEMPLATE.format(name=AGENT_DISPLAY_NAMES[agent])


def parse_select_command(text: str) -> FunctionId | None:
    """Recognize 'Select {agent name}' by display name or function id."""
    m = _SELECT_RE.match(text.strip())
    if not m:
        return None
    name = m.group(1).strip().lower()
    for agent, display in AGENT_DISPLAY_NAMES.items():
        if name == display or name == agent.value:
            return agent
    return None


def build_correction_prompt(
    raw: str, mem: GlobalMemory, rules: dict[str, str]
) -> str:
    lines = [
        TAG_CORRECT_VALIDATE,
        "Correct the transcribed voice command and judge whether it is a valid",
        "request for this surgical data assistant.",
        "",
        AGENT_DESCRIPTIONS,
        "",
        "Known transcription confusions (wrong -> intended):",
    ]
    for wrong, right in rules.items():
        lines.append(f'- "{wrong}" -> "{right}"')
    lines += [
        "",
        VALIDATION_RULES,
        "",
        render_memory_window(mem),
        "",
        f"Transcribed command: {quoted(raw)}",
        "",
        'Answer with one JSON object like {"revised": "...", "valid": true}.',
    ]
    return "\n".join(lines)


def correct_and_validate(
    transcript: Transcript,
    mem: GlobalMemory,
    backend: ChatBackend,
    rules: dict[str, str] | None = None,
    vocabulary: Iterable[str] | None = None,
) -> ValidationResult:
    """Correct the raw command and decide validity.

    A silent clip is revised to "Select {agent name}" for the most recent
    agent without consulting the model. A rule backstop marks commands that
    mention no known field, plane, structure, view, or action as invalid even
    if the model judged them valid.
    """
    if transcript.text is None:
        last = mem.last_agent()
        if last is None:
            return ValidationResult(revised="", valid=False)
        return ValidationResult(revised=select_command_for(last), valid=True)

    raw = transcript.text
    req = ChatRequest(
        system_prompt="",
        user_prompt=build_correction_prompt(raw, mem, rules or DEFAULT_CORRECTION_RULES),
    )
    try:
        response = backend.chat(req)
        parsed = parse_labeled_json(response.text, required=["revised", "valid"])
    except ParseError:
        return ValidationResult(revised=raw, valid=False)
    revised = str(parsed["revised"])
    valid = bool(parsed["valid"])
    if valid and not revised:
        valid = False
    if valid and vocabulary is not None and not mentions_known_vocabulary(revised, vocabulary):
        valid = False
    return ValidationResult(revised=revised, valid=valid)


def _normalize_words(text: str) -> str:
    # Apostrophes split ("patient's" matches the term "patient").
    return re.sub(r"[^a-z0-9]+", " ", text.lower()).strip()


def mentions_known_vocabulary(text: str, vocabulary: Iterable[str]) -> bool:
    """True when the text names at least one known term (word-boundary match)."""
    lowered = f" {_normalize_words(text)} "
    for term in vocabulary:
        t = _normalize_words(term)
        if t and f" {t} " in lowered:
            return True
    return False


def build_reasoning_prompt(revised: str, mem: GlobalMemory) -> str:
    lines = [
        TAG_COMMAND_REASONING,
        "Select the task agent that should handle this command. Think about",
        "what the command refers to; when it is ambiguous (like a bare zoom),",
        "lean on the most recent agent in the command history.",
        "",
        AGENT_DESCRIPTIONS,
        "",
        render_memory_window(mem),
        "",
        f"Command: {quoted(revised)}",
        "",
        'Answer with one JSON object like {"agent": "iv_agent"}.',
    ]
    return "\n".join(lines)


def reason_agent(
    validation: ValidationResult, mem: GlobalMemory, backend: ChatBackend
) -> AgentChoice:
    """Pick exactly one task agent for a validated command."""
    if not validation.valid:
        raise ValueError("reason_agent requires a valid command")
    selected = parse_select_command(validation.revised)
    if selected is not None:
        return AgentChoice(agent=selected, rationale="explicit agent selection")

    req = ChatRequest(
        system_prompt="", user_prompt=build_reasoning_prompt(validation.revised, mem)
    )
    try:
        response = backend.chat(req)
        parsed = parse_labeled_json(response.text, required=["agent"], optional=["rationale"])
    except ParseError as exc:
        raise StageFailure(f"agent reasoning parse failed: {exc}") from exc
    name = str(parsed["agent"])
    try:
        agent = FunctionId(name)
    except ValueError:
        raise StageFailure(f"unknown agent {name!r}") from None
    if agent not in TASK_AGENTS:
        raise StageFailure(f"{name!r} is not a task agent")
    return AgentChoice(agent=agent, rationale=parsed.get("rationale"))
