"""Chat-completion gateway: a live HTTP client and a deterministic mock.

Both backends answer through the same ``chat`` call so the workflow code
never knows which one it is talking to. Model output parsing is strict about
shape but forgiving about packaging: code fences are stripped and the first
balanced JSON object found in the text is used.
"""

from __future__ import annotations

import json
import logging
import os
import re
import time
from dataclasses import dataclass, field
from typing import Any, Iterable, Protocol

import requests

from .errors import MockMiss, ParseError, TransportError
from .model import FunctionId

logger = logging.getLogger(__name__)

ENV_URL = "VISA_LLM_URL"
ENV_MODEL = "VISA_LLM_MODEL"
DEFAULT_URL = "http://localhost:11434/v1/chat/completions"
DEFAULT_MODEL = "local-chat"

_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*\n(.*?)```", re.DOTALL)


@dataclass(frozen=True)
class ChatRequest:
    system_prompt: str
    user_prompt: str
    temperature: float = 0.0
    seed: int = 42
    max_tokens: int | None = None

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    @property
    def full_text(self) -> str:
        return self.system_prompt + "\n" + self.user_prompt


@dataclass(frozen=True)
class ChatResponse:
    text: str
    latency_ms: float


class ChatBackend(Protocol):
    def chat(self, req: ChatRequest) -> ChatResponse: ...


def chat(backend: ChatBackend, req: ChatRequest) -> ChatResponse:
    return backend.chat(req)


@dataclass
class MockEntry:
    """One scripted response: fires when every match substring is present."""

    match: tuple[str, ...]
    response: str
    once: bool = False

    def matches(self, text: str) -> bool:
        return all(m in text for m in self.match)


@dataclass
class MockScript:
    entries: list[MockEntry] = field(default_factory=list)
    strict: bool = True

    def add(self, match: str | Iterable[str], response: str, once: bool = False) -> None:
        if isinstance(match, str):
            match = (match,)
        self.entries.append(MockEntry(tuple(match), response, once))

    @classmethod
    def from_jsonl(cls, path: str, strict: bool = True) -> "MockScript":
        script = cls(strict=strict)
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                script.add(obj["match"], obj["response"], once=obj.get("once", False))
        return script

    def to_jsonl(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for e in self.entries:
                row = {"match": list(e.match), "response": e.response}
                if e.once:
                    row["once"] = True
                fh.write(json.dumps(row) + "\n")


class MockBackend:
    """Replays a MockScript. Fully deterministic for a given request sequence."""

    def __init__(self, script: MockScript):
        self.script = script
        self.requests: list[ChatRequest] = []

    def chat(self, req: ChatRequest) -> ChatResponse:
        started = time.perf_counter()
        self.requests.append(req)
        text = req.full_text
        hits = [e for e in self.script.entries if e.matches(text)]
        if self.script.strict and len(hits) != 1:
            preview = text[:160].replace("\n", " | ")
            raise MockMiss(
                f"strict mock matched {len(hits)} entries (want exactly 1) for request: {preview!r}"
            )
        if not hits:
            return ChatResponse(text="", latency_ms=_ms_since(started))
        entry = hits[0]
        if entry.once:
            self.script.entries.remove(entry)
        return ChatResponse(text=entry.response, latency_ms=_ms_since(started))


class LiveBackend:
    """POSTs chat-completion requests to a local model server."""

    def __init__(
        self,
        url: str | None = None,
        model: str | None = None,
        timeout_s: float = 120.0,
    ):
        self.url = url or os.environ.get(ENV_URL, DEFAULT_URL)
        self.model = model or os.environ.get(ENV_MODEL, DEFAULT_MODEL)
        self.timeout_s = timeout_s

    def chat(self, req: ChatRequest) -> ChatResponse:
        started = time.perf_counter()
        body: dict[str, Any] = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": req.system_prompt},
                {"role": "user", "content": req.user_prompt},
            ],
            "temperature": req.temperature,
            "seed": req.seed,
        }
        if req.max_tokens is not None:
            body["max_tokens"] = req.max_tokens
        try:
            resp = requests.post(self.url, json=body, timeout=self.timeout_s)
            resp.raise_for_status()
            payload = resp.json()
            text = payload["choices"][0]["message"]["content"]
        except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
            raise TransportError(f"chat endpoint {self.url} failed: {exc}") from exc
        return ChatResponse(text=text, latency_ms=_ms_since(started))


def _ms_since(started: float) -> float:
    return (time.perf_counter() - started) * 1000.0


def extract_json_object(text: str) -> dict[str, Any]:
    """First balanced ``{...}`` in the text, after unwrapping code fences."""
    fenced = _FENCE_RE.search(text)
    if fenced:
        text = fenced.group(1)
    start = text.find("{")
    while start != -1:
        candidate = _scan_balanced(text, start)
        if candidate is not None:
            try:
                obj = json.loads(candidate)
            except json.JSONDecodeError:
                obj = None
            if isinstance(obj, dict):
                return obj
        start = text.find("{", start + 1)
    raise ParseError(f"no JSON object found in model output: {text[:120]!r}")


def _scan_balanced(text: str, start: int) -> str | None:
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    return None


def parse_probability_json(
    text: str, expected_keys: Iterable[FunctionId] | None = None
) -> dict[FunctionId, float]:
    """Pull a function->probability map out of model output.

    Only known function names survive; values are clamped into [0, 1].
    Missing functions are left missing (completion is the orchestrator's job).
    Duplicate keys in the raw JSON resolve last-wins.
    """
    expected = set(expected_keys) if expected_keys is not None else set(FunctionId)
    obj = extract_json_object(text)
    out: dict[FunctionId, float] = {}
    for key, value in obj.items():
        try:
            fid = FunctionId(key)
        except ValueError:
            logger.debug("dropping unknown function key %r", key)
            continue
        if fid not in expected:
            logger.debug("dropping unexpected function key %r", key)
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            logger.debug("dropping non-numeric probability for %r: %r", key, value)
            continue
        clamped = min(1.0, max(0.0, float(value)))
        if clamped != value:
            logger.debug("clamped probability for %s: %r -> %r", key, value, clamped)
        out[fid] = clamped
    return out


def parse_labeled_json(
    text: str,
    required: Iterable[str],
    optional: Iterable[str] = (),
) -> dict[str, Any]:
    """Parse a stage output object, demanding the required fields."""
    obj = extract_json_object(text)
    out: dict[str, Any] = {}
    for name in required:
        if name not in obj:
            raise ParseError(f"missing required field {name!r} in model output")
        out[name] = obj[name]
    for name in optional:
        if name in obj:
            out[name] = obj[name]
    return out
