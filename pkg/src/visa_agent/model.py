"""Session, memory, and clip types shared by every other module.

A session processes one 10-second video clip at a time; each clip carries at
most one spoken command. Local memory belongs to the current clip, global
memory accumulates (revised command, agent) pairs across clips and is read
through a small window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

CLIP_SECONDS = 10.0
MEMORY_WINDOW = 3
DEFAULT_IC_MAX = 3


class FunctionId(str, Enum):
    """Workflow and agent functions, in canonical (tie-breaking) order."""

    REAL_TIME_AUDIO = "real_time_audio"
    STT = "stt"
    CORRECT_VALIDATE = "correct_validate"
    COMMAND_REASONING = "command_reasoning"
    IR_AGENT = "ir_agent"
    IV_AGENT = "iv_agent"
    AR_AGENT = "ar_agent"
    END = "end"


FUNCTION_ORDER: tuple[FunctionId, ...] = tuple(FunctionId)

TASK_AGENTS: tuple[FunctionId, ...] = (
    FunctionId.IR_AGENT,
    FunctionId.IV_AGENT,
    FunctionId.AR_AGENT,
)

AGENT_DISPLAY_NAMES: dict[FunctionId, str] = {
    FunctionId.IR_AGENT: "information retrieval agent",
    FunctionId.IV_AGENT: "image viewer agent",
    FunctionId.AR_AGENT: "anatomy rendering agent",
}

# Short agent codes used by the command dataset.
AGENT_CODES: dict[str, FunctionId] = {
    "ir": FunctionId.IR_AGENT,
    "iv": FunctionId.IV_AGENT,
    "ar": FunctionId.AR_AGENT,
}


class Status(str, Enum):
    """Workflow status strings fed to the orchestrator prompt.

    NO_AUDIO, INVALID, and AGENT_DONE are fixed vocabulary; the remaining
    values are plumbing so every orchestrator step sees a distinct status.
    """

    NO_AUDIO = "No audio recorded"
    INVALID = "Last command invalid, need new input"
    AGENT_DONE = "Agent completed, workflow finished"
    AUDIO_RECORDED = "Audio recorded"
    TRANSCRIBED = "Command transcribed"
    VALID = "Command valid"
    AGENT_SELECTED = "Agent selected"
    IDLE = "Idle"


@dataclass(frozen=True)
class ClipRef:
    """A 10-second clip slot within the session's video."""

    index: int

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError("clip index must be non-negative")

    @property
    def start_s(self) -> float:
        return self.index * CLIP_SECONDS

    @property
    def duration_s(self) -> float:
        return CLIP_SECONDS


@dataclass
class GlobalMemory:
    """Append-only history of (revised command, agent) pairs."""

    history: list[tuple[str, FunctionId]] = field(default_factory=list)

    def window(self, k: int = MEMORY_WINDOW) -> list[tuple[str, FunctionId]]:
        return memory_window(self, k)

    def last_agent(self) -> FunctionId | None:
        if not self.history:
            return None
        return self.history[-1][1]


def memory_window(mem: GlobalMemory, k: int = MEMORY_WINDOW) -> list[tuple[str, FunctionId]]:
    """Most recent ``min(k, len(history))`` entries, oldest of them first."""
    if k < 1:
        raise ValueError("window size must be >= 1")
    return list(mem.history[-k:])


def append_memory(mem: GlobalMemory, revised: str, agent: FunctionId) -> GlobalMemory:
    """Append one (revised, agent) pair; prior entries are untouched."""
    if not revised:
        raise ValueError("revised command must be nonempty")
    if agent not in TASK_AGENTS:
        raise ValueError(f"not a task agent: {agent}")
    mem.history.append((revised, agent))
    return mem


@dataclass
class LocalMemory:
    """Per-clip working memory."""

    clip: ClipRef
    raw_command: str | None = None
    revised_command: str | None = None
    valid: bool | None = None
    agent: FunctionId | None = None
    agent_state_snapshot: dict[FunctionId, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "clip": self.clip.index,
            "raw_command": self.raw_command,
            "revised_command": self.revised_command,
            "valid": self.valid,
            "agent": self.agent.value if self.agent else None,
        }


@dataclass
class SessionState:
    """Full mutable state of one interactive session."""

    clip: ClipRef = field(default_factory=lambda: ClipRef(0))
    local: LocalMemory = None  # type: ignore[assignment]
    global_memory: GlobalMemory = field(default_factory=GlobalMemory)
    status: Status = Status.IDLE
    invalid_cycles: int = 0
    current_function: FunctionId | None = None
    agent_states: dict[FunctionId, Any] = field(default_factory=dict)
    ic_max: int = DEFAULT_IC_MAX

    def __post_init__(self) -> None:
        if self.local is None:
            self.local = LocalMemory(clip=self.clip)

    @property
    def active_agent(self) -> FunctionId | None:
        """Agent selected for the current clip, else the last remembered one."""
        if self.local.agent is not None:
            return self.local.agent
        return self.global_memory.last_agent()

    def advance_clip(self) -> None:
        """Move to the next clip: snapshot agent states, reset clip-local fields."""
        snapshot = {aid: _snapshot(state) for aid, state in self.agent_states.items()}
        self.local.agent_state_snapshot = snapshot
        self.clip = ClipRef(self.clip.index + 1)
        self.local = LocalMemory(clip=self.clip)
        self.invalid_cycles = 0
        self.status = Status.IDLE
        self.current_function = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "clip": self.clip.index,
            "status": self.status.value,
            "invalid_cycles": self.invalid_cycles,
            "current_function": self.current_function.value if self.current_function else None,
            "local": self.local.to_dict(),
            "memory_window": [
                {"revised": text, "agent": agent.value}
                for text, agent in self.global_memory.window()
            ],
            "agent_states": {
                aid.value: state.to_dict() if hasattr(state, "to_dict") else state
                for aid, state in self.agent_states.items()
            },
        }


def _snapshot(state: Any) -> Any:
    if hasattr(state, "copy"):
        return state.copy()
    return state
