"""Batch evaluation: run every dataset command through the workflow and score it.

Each command gets a fresh session whose global memory is seeded with a
"Select {agent}" entry for its gold agent, standing in for the conversational
context the command was annotated under (implicit commands like "Zoom out"
are unresolvable without it).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any

from .evaluation import CommandRecord, OutcomeRow, score_command
from .llm import ChatBackend, MockBackend
from .model import append_memory
from .orchestrator import WorkflowTrace
from .scripting import build_mock_script
from .session import Session, SessionConfig
from .stages import FixtureSource, select_command_for


@dataclass
class EvalRun:
    rows: list[OutcomeRow]
    traces: list[WorkflowTrace]
    elapsed_s: float
    extras: dict[str, Any] = field(default_factory=dict)


def run_record(
    record: CommandRecord,
    backend: ChatBackend,
    config: SessionConfig | None = None,
) -> tuple[OutcomeRow, WorkflowTrace]:
    """Run one command in a fresh seeded session and score it."""
    session = Session(
        backend=backend,
        source=FixtureSource([record.raw_text], speaker=record.speaker),
        config=config,
    )
    append_memory(
        session.state.global_memory,
        select_command_for(record.gold_agent),
        record.gold_agent,
    )
    result = session.run_one_clip()
    row = score_command(result.trace, result.outputs, record)
    return row, result.trace


def evaluate_dataset(
    records: list[CommandRecord],
    backend: ChatBackend | None = None,
    config: SessionConfig | None = None,
) -> EvalRun:
    """Score the full dataset; without a backend, a gold-derived mock is used."""
    if backend is None:
        backend = MockBackend(build_mock_script(records))
    started = time.perf_counter()
    rows: list[OutcomeRow] = []
    traces: list[WorkflowTrace] = []
    for record in records:
        row, trace = run_record(record, backend, config)
        rows.append(row)
        traces.append(trace)
    return EvalRun(rows=rows, traces=traces, elapsed_s=time.perf_counter() - started)
