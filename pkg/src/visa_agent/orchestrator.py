"""Workflow orchestrator: plans each step with the LLM, then applies rules.

The loop for one clip is: build prompt -> chat -> parse probabilities ->
complete missing functions with zeros -> argmax selection -> hard decision
rules (invalid loop, agent-done, loop limit) -> execute the stage -> repeat
until ``end``. The LLM proposes; the rules have the last word.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import ParseError, StageFailure
from .llm import ChatBackend, ChatRequest, parse_probability_json
from .model import (
    FUNCTION_ORDER,
    TASK_AGENTS,
    FunctionId,
    SessionState,
    Status,
)
from .prompts import DECISION_RULES, FUNCTION_DEFINITIONS, TAG_ORCHESTRATOR

logger = logging.getLogger(__name__)

# Hard ceiling on steps per clip; generous next to ic_max * pass length.
MAX_STEPS_PER_CLIP = 64

# What a stageless orchestrator would do, keyed by status. Used when the
# model proposal is empty or unusable.
FALLBACK_TABLE: dict[Status, FunctionId] = {
    Status.IDLE: FunctionId.REAL_TIME_AUDIO,
    Status.AUDIO_RECORDED: FunctionId.STT,
    Status.NO_AUDIO: FunctionId.CORRECT_VALIDATE,
    Status.TRANSCRIBED: FunctionId.CORRECT_VALIDATE,
    Status.VALID: FunctionId.COMMAND_REASONING,
    Status.INVALID: FunctionId.REAL_TIME_AUDIO,
    Status.AGENT_DONE: FunctionId.END,
}


@dataclass
class FunctionProposal:
    """Completed probability map over every workflow function."""

    probs: dict[FunctionId, float]
    source: str = "llm"  # "llm" or "fallback"

    def to_dict(self) -> dict[str, Any]:
        return {"probs": {f.value: p for f, p in self.probs.items()}, "source": self.source}


@dataclass
class TraceStep:
    step: int
    status_before: Status
    proposal: FunctionProposal
    chosen: FunctionId
    executed: FunctionId

    @property
    def overridden(self) -> bool:
        return self.chosen is not self.executed

    def to_dict(self) -> dict[str, Any]:
        return {
            "step": self.step,
            "status_before": self.status_before.value,
            "proposal": self.proposal.to_dict(),
            "chosen": self.chosen.value,
            "executed": self.executed.value,
            "overridden": self.overridden,
        }


@dataclass
class WorkflowTrace:
    clip: int
    steps: list[TraceStep] = field(default_factory=list)
    ic_events: list[float] = field(default_factory=list)
    failed: bool = False
    failure_reason: str | None = None

    @property
    def executed_sequence(self) -> list[FunctionId]:
        return [s.executed for s in self.steps]

    @property
    def invalid_cycles(self) -> int:
        return len(self.ic_events)

    def to_dict(self) -> dict[str, Any]:
        return {
            "clip": self.clip,
            "steps": [s.to_dict() for s in self.steps],
            "ic_events": list(self.ic_events),
            "failed": self.failed,
            "failure_reason": self.failure_reason,
        }


@dataclass
class StageResult:
    """What a stage hands back to the loop."""

    status: Status
    terminate: bool = False
    note: str = ""


StageFn = Callable[[SessionState], StageResult]
StageRegistry = dict[FunctionId, StageFn]


def build_orchestrator_prompt(state: SessionState) -> str:
    """Planning prompt: instructions, functions, rules, status, output format."""
    lines = [
        TAG_ORCHESTRATOR,
        "You are the workflow orchestrator for a voice-interactive surgical assistant.",
        "Decide which function to execute next and answer with probabilities.",
        "",
        "Functions:",
    ]
    for fid in FUNCTION_ORDER:
        lines.append(f"- {fid.value}: {FUNCTION_DEFINITIONS[fid]}")
    lines += ["", DECISION_RULES, ""]
    lines.append(f'Current status: "{state.status.value}"')
    active = state.active_agent
    if active is not None:
        lines.append(f"Active agent: {active.value}")
    lines += [
        "",
        "Answer with a single JSON object mapping function names to probabilities,",
        'for example {"stt": 0.9, "end": 0.1}. Do not add any other text.',
    ]
    return "\n".join(lines)


def complete_missing_functions(partial: dict[FunctionId, float]) -> FunctionProposal:
    """Fill absent functions with probability exactly 0.0."""
    probs = {fid: float(partial.get(fid, 0.0)) for fid in FUNCTION_ORDER}
    return FunctionProposal(probs=probs, source="llm")


def select_next_function(
    proposal: FunctionProposal,
    status: Status | None = None,
    active_agent: FunctionId | None = None,
) -> FunctionId:
    """Argmax over the completed map; canonical order breaks ties.

    An all-zero proposal has no argmax worth trusting, so the status-keyed
    fallback table decides instead (the agent slot resolves to the active
    agent when one has been selected).
    """
    best: FunctionId | None = None
    best_p = 0.0
    for fid in FUNCTION_ORDER:
        p = proposal.probs.get(fid, 0.0)
        if p > best_p:
            best, best_p = fid, p
    if best is not None:
        return best
    return _fallback_function(status, active_agent)


def _fallback_function(status: Status | None, active_agent: FunctionId | None) -> FunctionId:
    if status is None:
        return FunctionId.REAL_TIME_AUDIO
    if status is Status.AGENT_SELECTED:
        return active_agent if active_agent in TASK_AGENTS else FunctionId.COMMAND_REASONING
    return FALLBACK_TABLE[status]


def apply_decision_rules(state: SessionState, chosen: FunctionId) -> FunctionId:
    """Hard overrides that keep the workflow on the rails.

    Invalid command -> back to audio (counting one invalid cycle); too many
    cycles -> end with failure; agent finished -> end.
    """
    if state.status is Status.INVALID:
        state.invalid_cycles += 1
        if state.invalid_cycles > state.ic_max:
            return FunctionId.END
        return FunctionId.REAL_TIME_AUDIO
    if state.status is Status.AGENT_DONE:
        return FunctionId.END
    return chosen


def run_clip(
    state: SessionState,
    backend: ChatBackend,
    stage_registry: StageRegistry,
) -> tuple[SessionState, WorkflowTrace]:
    """Drive one clip's workflow to completion."""
    for fid in FUNCTION_ORDER:
        if fid not in stage_registry:
            raise ValueError(f"stage registry is missing {fid.value}")

    trace = WorkflowTrace(clip=state.clip.index)
    # Budget scales with the retry allowance so a raised ic_max still ends
    # through the loop-limit rule rather than the raw step ceiling.
    max_steps = max(MAX_STEPS_PER_CLIP, (state.ic_max + 2) * 4)
    for step_index in range(max_steps):
        status_before = state.status
        proposal = _propose(state, backend)
        chosen = select_next_function(proposal, status_before, state.active_agent)

        ic_before = state.invalid_cycles
        executed = apply_decision_rules(state, chosen)
        if state.invalid_cycles > ic_before:
            trace.ic_events.append(float(step_index))
            if executed is FunctionId.END:
                trace.failed = True
                trace.failure_reason = (
                    f"invalid cycles exceeded limit ({state.invalid_cycles} > {state.ic_max})"
                )

        trace.steps.append(TraceStep(step_index, status_before, proposal, chosen, executed))
        state.current_function = executed

        if executed is FunctionId.END:
            return state, trace

        try:
            result = stage_registry[executed](state)
        except StageFailure as exc:
            logger.warning("stage %s failed: %s", executed.value, exc)
            result = StageResult(status=Status.INVALID, note=str(exc))
        state.status = result.status
        if result.terminate:
            trace.steps.append(
                TraceStep(step_index + 1, state.status, _terminal_proposal(), FunctionId.END, FunctionId.END)
            )
            return state, trace

    trace.failed = True
    trace.failure_reason = f"step budget exhausted ({max_steps})"
    trace.steps.append(
        TraceStep(max_steps, state.status, _terminal_proposal(), FunctionId.END, FunctionId.END)
    )
    return state, trace


def _propose(state: SessionState, backend: ChatBackend) -> FunctionProposal:
    prompt = build_orchestrator_prompt(state)
    req = ChatRequest(system_prompt="", user_prompt=prompt)
    try:
        response = backend.chat(req)
        partial = parse_probability_json(response.text)
    except ParseError:
        logger.debug("unparseable orchestrator output; treating as all-zero proposal")
        return FunctionProposal(probs={fid: 0.0 for fid in FUNCTION_ORDER}, source="fallback")
    return complete_missing_functions(partial)


def _terminal_proposal() -> FunctionProposal:
    probs = {fid: 0.0 for fid in FUNCTION_ORDER}
    probs[FunctionId.END] = 1.0
    return FunctionProposal(probs=probs, source="fallback")


def trace_matches_reference(trace: WorkflowTrace) -> bool:
    """Check the executed order against the reference workflow grammar.

    Accepted shape: one or more intake passes (audio -> stt -> correct) --
    stt may be skipped only on a pass where nothing was heard -- then
    reasoning, one task agent, end.
    """
    steps = trace.steps
    n = len(steps)
    i = 0
    passes = 0
    while True:
        if i >= n or steps[i].executed is not FunctionId.REAL_TIME_AUDIO:
            break
        i += 1
        if i < n and steps[i].executed is FunctionId.STT:
            i += 1
            if i >= n or steps[i].executed is not FunctionId.CORRECT_VALIDATE:
                return False
        elif i < n and steps[i].executed is FunctionId.CORRECT_VALIDATE:
            if steps[i].status_before is not Status.NO_AUDIO:
                return False
        else:
            return False
        i += 1
        passes += 1
    if passes == 0:
        return False
    if i >= n or steps[i].executed is not FunctionId.COMMAND_REASONING:
        return False
    i += 1
    if i >= n or steps[i].executed not in TASK_AGENTS:
        return False
    i += 1
    if i >= n or steps[i].executed is not FunctionId.END:
        return False
    return i == n - 1


def export_trace_jsonl(traces: list[WorkflowTrace], path: str) -> None:
    """One JSON object per orchestrator step, across all given traces."""
    with open(path, "w", encoding="utf-8") as fh:
        for trace in traces:
            for step in trace.steps:
                row = {"clip": trace.clip, **step.to_dict()}
                fh.write(json.dumps(row) + "\n")
