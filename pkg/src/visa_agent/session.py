"""One interactive session: state, resources, and the stage registry.

The session owns the transcript source, the chat backend, the fixtures
(column/structure manifests, patient record, volume), and the per-agent
states. It wires each workflow function to a closure the orchestrator can
execute, and records the outputs needed for scoring.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any

from . import resources
from .agents import ar, ir, iv
from .errors import SourceExhausted
from .evaluation import RunOutputs
from .llm import ChatBackend
from .model import FunctionId, SessionState, Status, append_memory
from .orchestrator import StageRegistry, StageResult, WorkflowTrace, run_clip
from .stages import (
    Transcript,
    TranscriptSource,
    ValidationResult,
    correct_and_validate,
    intake_transcript,
    parse_select_command,
    reason_agent,
)
from .timeline import DEFAULT_FPS, OverlayTimeline

_session_ids = itertools.count(1)


@dataclass
class SessionConfig:
    fps: int = DEFAULT_FPS
    ic_max: int = 3
    tau: float = ir.DEFAULT_THRESHOLD
    volume_dims: tuple[int, int, int] = (512, 512, 512)


@dataclass
class ClipResult:
    trace: WorkflowTrace
    outputs: RunOutputs
    timeline: OverlayTimeline | None
    acting_agent: FunctionId | None

    def to_dict(self) -> dict[str, Any]:
        return {
            "trace": self.trace.to_dict(),
            "revised": self.outputs.revised,
            "valid": self.outputs.valid,
            "agent": self.acting_agent.value if self.acting_agent else None,
            "timeline": self.timeline.to_dict() if self.timeline else None,
        }


class Session:
    """Single-writer session over one backend and one transcript source."""

    def __init__(
        self,
        backend: ChatBackend,
        source: TranscriptSource,
        config: SessionConfig | None = None,
        column_manifest: ir.ColumnManifest | None = None,
        patient_record: dict[str, Any] | None = None,
        structure_manifest: ar.StructureManifest | None = None,
        volume: iv.Volume | None = None,
        correction_rules: dict[str, str] | None = None,
        session_id: str | None = None,
    ):
        self.id = session_id or f"s{next(_session_ids):06d}"
        self.backend = backend
        self.source = source
        self.config = config or SessionConfig()
        self.columns = column_manifest or resources.column_manifest()
        self.record = patient_record or resources.patient_record()
        self.structures = structure_manifest or resources.structure_manifest()
        self.volume = volume or iv.Volume.gradient(self.config.volume_dims)
        self.rules = correction_rules or resources.correction_rules()
        self.vocabulary = resources.known_vocabulary()
        self.state = self._fresh_state()
        self._pending: Transcript | None = None
        self._outputs = RunOutputs()
        self._timeline: OverlayTimeline | None = None
        self._acting_agent: FunctionId | None = None

    def _fresh_state(self) -> SessionState:
        state = SessionState(ic_max=self.config.ic_max)
        state.agent_states = {
            FunctionId.IR_AGENT: ir.IrState.empty(self.columns),
            FunctionId.IV_AGENT: iv.IvState.default(self.volume),
            FunctionId.AR_AGENT: ar.default_state(self.structures),
        }
        return state

    def reset(self) -> None:
        """Back to a freshly created session, keeping the id and config."""
        self.state = self._fresh_state()
        self._pending = None
        self._outputs = RunOutputs()
        self._timeline = None
        self._acting_agent = None

    # -- stage implementations -------------------------------------------

    def _stage_audio(self, state: SessionState) -> StageResult:
        try:
            self._pending = intake_transcript(self.source)
        except SourceExhausted as exc:
            return StageResult(status=state.status, terminate=True, note=str(exc))
        if self._outputs.transcript_text is None and self._pending.text is not None:
            self._outputs.transcript_text = self._pending.text
        if self._pending.text is None:
            return StageResult(status=Status.NO_AUDIO)
        return StageResult(status=Status.AUDIO_RECORDED)

    def _stage_stt(self, state: SessionState) -> StageResult:
        text = self._pending.text if self._pending else None
        state.local.raw_command = text
        return StageResult(status=Status.TRANSCRIBED)

    def _stage_correct_validate(self, state: SessionState) -> StageResult:
        transcript = self._pending or Transcript(text=state.local.raw_command)
        result = correct_and_validate(
            transcript, state.global_memory, self.backend, self.rules, self.vocabulary
        )
        state.local.revised_command = result.revised
        state.local.valid = result.valid
        self._outputs.revised = result.revised
        self._outputs.valid = result.valid
        if result.valid:
            return StageResult(status=Status.VALID)
        return StageResult(status=Status.INVALID)

    def _stage_reasoning(self, state: SessionState) -> StageResult:
        validation = ValidationResult(revised=state.local.revised_command or "", valid=True)
        choice = reason_agent(validation, state.global_memory, self.backend)
        state.local.agent = choice.agent
        self._outputs.agent = choice.agent
        append_memory(state.global_memory, validation.revised, choice.agent)
        return StageResult(status=Status.AGENT_SELECTED)

    def _stage_agent(self, state: SessionState, agent_id: FunctionId) -> StageResult:
        revised = state.local.revised_command or ""
        selected = parse_select_command(revised)
        if selected is not None:
            self._timeline = self._reemit(agent_id)
            self._acting_agent = agent_id
            return StageResult(status=Status.AGENT_DONE)

        if agent_id is FunctionId.IR_AGENT:
            decision = ir.determine_action_ir(revised, self.columns, self.backend)
            new_state, timeline = ir.apply_ir(
                state.agent_states[agent_id], decision, self.columns, self.record,
                self.config.fps, self.config.tau,
            )
            params = decision.params_dict(self.columns, self.config.tau)
        elif agent_id is FunctionId.IV_AGENT:
            decision = iv.determine_action_iv(revised, state.agent_states[agent_id], self.backend)
            new_state, timeline = iv.apply_iv(
                state.agent_states[agent_id], decision, self.volume, self.config.fps
            )
            params = decision.params_dict()
        else:
            decision = ar.determine_action_ar(revised, state.agent_states[agent_id], self.backend)
            new_state, timeline = ar.apply_ar(
                state.agent_states[agent_id], decision, self.structures, self.config.fps
            )
            params = decision.params_dict()

        state.agent_states[agent_id] = new_state
        self._timeline = timeline
        self._acting_agent = agent_id
        self._outputs.action = decision.action
        self._outputs.params = params
        return StageResult(status=Status.AGENT_DONE)

    def _reemit(self, agent_id: FunctionId) -> OverlayTimeline:
        fps = self.config.fps
        if agent_id is FunctionId.IR_AGENT:
            return ir.reemit_ir(self.state.agent_states[agent_id], fps)
        if agent_id is FunctionId.IV_AGENT:
            return iv.reemit_iv(self.state.agent_states[agent_id], fps)
        return ar.reemit_ar(self.state.agent_states[agent_id], fps)

    def _stage_end(self, state: SessionState) -> StageResult:
        return StageResult(status=state.status)

    def build_registry(self) -> StageRegistry:
        return {
            FunctionId.REAL_TIME_AUDIO: self._stage_audio,
            FunctionId.STT: self._stage_stt,
            FunctionId.CORRECT_VALIDATE: self._stage_correct_validate,
            FunctionId.COMMAND_REASONING: self._stage_reasoning,
            FunctionId.IR_AGENT: lambda s: self._stage_agent(s, FunctionId.IR_AGENT),
            FunctionId.IV_AGENT: lambda s: self._stage_agent(s, FunctionId.IV_AGENT),
            FunctionId.AR_AGENT: lambda s: self._stage_agent(s, FunctionId.AR_AGENT),
            FunctionId.END: self._stage_end,
        }

    # -- clip driving ------------------------------------------------------

    def run_one_clip(self) -> ClipResult:
        """Run the workflow for the current clip and advance to the next."""
        self._pending = None  # never let a previous clip's transcript leak
        self._outputs = RunOutputs()
        self._timeline = None
        self._acting_agent = None
        self.state, trace = run_clip(self.state, self.backend, self.build_registry())
        result = ClipResult(
            trace=trace,
            outputs=self._outputs,
            timeline=self._timeline,
            acting_agent=self._acting_agent,
        )
        self.state.advance_clip()
        return result

    def state_snapshot(self) -> dict[str, Any]:
        snap = self.state.to_dict()
        snap["id"] = self.id
        snap["config"] = {
            "fps": self.config.fps,
            "ic_max": self.config.ic_max,
            "tau": self.config.tau,
        }
        return snap
