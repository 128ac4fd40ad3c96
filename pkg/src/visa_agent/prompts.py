"""Prompt text shared by the orchestrator and the workflow/agent stages.

Every prompt opens with a machine-readable stage tag so scripted mock
backends can route on it, and quotes command text in double quotes so
matchers never confuse one command with a longer one containing it.
"""

from __future__ import annotations

from .model import AGENT_DISPLAY_NAMES, FunctionId, GlobalMemory, memory_window

TAG_ORCHESTRATOR = "[stage: orchestrator]"
TAG_CORRECT_VALIDATE = "[stage: correct_validate]"
TAG_COMMAND_REASONING = "[stage: command_reasoning]"
TAG_IR_ACTION = "[stage: ir_action]"
TAG_IV_ACTION = "[stage: iv_action]"
TAG_AR_ACTION = "[stage: ar_action]"

FUNCTION_DEFINITIONS: dict[FunctionId, str] = {
    FunctionId.REAL_TIME_AUDIO: "capture the next voice input for the current clip",
    FunctionId.STT: "transcribe the captured audio into text",
    FunctionId.CORRECT_VALIDATE: "correct the transcribed command and judge its validity",
    FunctionId.COMMAND_REASONING: "select the task agent that should handle the command",
    FunctionId.IR_AGENT: "overlay requested clinical information on the video",
    FunctionId.IV_AGENT: "navigate and overlay CT slice views",
    FunctionId.AR_AGENT: "manipulate the 3D anatomy model overlay",
    FunctionId.END: "finish the workflow for this clip",
}

DECISION_RULES = """Workflow decision rules:
- Start every clip by capturing audio, then transcribe, then correct and validate.
- A valid command goes to command reasoning, which hands off to exactly one task agent.
- When the last command was invalid (status '{invalid}'), return to real_time_audio for new input.
- When a task agent has completed (status '{done}'), choose end.
- If nothing was heard (status '{no_audio}'), send the empty command to correct_validate so it can fall back to the previous agent.
- Never run a task agent before command reasoning has selected it.""".format(
    invalid="Last command invalid, need new input",
    done="Agent completed, workflow finished",
    no_audio="No audio recorded",
)

AGENT_DESCRIPTIONS = """Available task agents:
- information retrieval agent (ir_agent): shows or hides patient clinical information such as sex, age, physical information, diagnosis, comorbidities, pulmonary function tests (PFT: FEV1, FVC), surgery and tumor details.
- image viewer agent (iv_agent): moves and zooms CT slice views across the axial, coronal, and sagittal planes.
- anatomy rendering agent (ar_agent): shows, rotates, and zooms 3D anatomy structures (lung lobes, nodules, trachea/bronchia)."""


def render_memory_window(mem: GlobalMemory, k: int = 3) -> str:
    """Canonical rendering of the recent-commands window used in prompts."""
    entries = memory_window(mem, k)
    if not entries:
        return "Recent commands: (none)"
    lines = ["Recent commands:"]
    for i, (text, agent) in enumerate(entries, start=1):
        lines.append(f'{i}. "{text}" -> {agent.value}')
    lines.append(f"Most recent agent: {entries[-1][1].value}")
    return "\n".join(lines)


def quoted(text: str) -> str:
    return f'"{text}"'


def agent_display(agent: FunctionId) -> str:
    return AGENT_DISPLAY_NAMES[agent]
