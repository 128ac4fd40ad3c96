"""Information retrieval agent: patient-data text overlays.

A command becomes a SHOW/HIDE action plus per-field inclusion probabilities;
thresholding picks the columns, per-column formatters build the lines, and
the joined string is overlaid in the top-right corner for the clip.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any

from ..errors import ParseError, StageFailure
from ..llm import ChatBackend, ChatRequest, parse_labeled_json
from ..model import CLIP_SECONDS
from ..prompts import TAG_IR_ACTION, quoted
from ..timeline import DEFAULT_FPS, DirectiveKind, OverlayDirective, OverlayTimeline

ACTIONS = ("SHOW", "HIDE")
DEFAULT_THRESHOLD = 0.5
MISSING_MARK = "—"  # long dash shown when a record lacks a value

KIND_TEXT = "text"
KIND_NUMBER = "number-with-unit"
KIND_COMPOSITE = "composite"


@dataclass(frozen=True)
class Column:
    id: str
    label: str
    kind: str
    unit: str = ""
    template: str = ""  # composite kinds format value dicts through this


@dataclass
class ColumnManifest:
    columns: list[Column]
    aliases: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        ids = [c.id for c in self.columns]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate column ids in manifest")
        known = set(ids)
        for phrase, targets in self.aliases.items():
            unknown = set(targets) - known
            if unknown:
                raise ValueError(f"alias {phrase!r} maps to unknown columns {sorted(unknown)}")

    @property
    def ids(self) -> list[str]:
        return [c.id for c in self.columns]

    def column(self, cid: str) -> Column:
        for c in self.columns:
            if c.id == cid:
                return c
        raise KeyError(cid)

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> "ColumnManifest":
        cols = [
            Column(
                id=c["id"],
                label=c["label"],
                kind=c["kind"],
                unit=c.get("unit", ""),
                template=c.get("template", ""),
            )
            for c in obj["columns"]
        ]
        aliases = {k: tuple(v) for k, v in obj.get("aliases", {}).items()}
        return cls(columns=cols, aliases=aliases)


@dataclass
class IrState:
    """Active field bits (manifest order) and the composed overlay string."""

    y: tuple[int, ...]
    s: str = ""

    @classmethod
    def empty(cls, manifest: ColumnManifest) -> "IrState":
        return cls(y=tuple(0 for _ in manifest.columns), s="")

    def copy(self) -> "IrState":
        return replace(self)

    def to_dict(self) -> dict[str, Any]:
        return {"y": list(self.y), "s": self.s}


@dataclass
class IrDecision:
    action: str
    field_probs: dict[str, float]

    def params_dict(self, manifest: ColumnManifest, tau: float = DEFAULT_THRESHOLD) -> dict[str, Any]:
        """Canonical parameter payload used for outcome scoring."""
        y = threshold_fields(self, tau, manifest)
        return {"fields": [cid for cid, bit in zip(manifest.ids, y) if bit]}


def build_ir_prompt(cmd: str, manifest: ColumnManifest) -> str:
    lines = [
        TAG_IR_ACTION,
        "You are the information retrieval agent. Decide whether to SHOW or HIDE",
        "patient information and which data fields the command asks for.",
        "",
        "Data fields:",
    ]
    for col in manifest.columns:
        lines.append(f"- {col.id}: {col.label}")
    if manifest.aliases:
        lines.append("")
        lines.append("Phrase hints:")
        for phrase, targets in manifest.aliases.items():
            lines.append(f'- "{phrase}" means {", ".join(targets)}')
    lines += [
        "",
        '"Reset" means HIDE and restore the default (empty) overlay.',
        f"Command: {quoted(cmd)}",
        "",
        "Answer with one JSON object of the form",
        '{"action": "SHOW", "fields": {"age": 0.9}} giving a probability per field.',
    ]
    return "\n".join(lines)


def determine_action_ir(cmd: str, manifest: ColumnManifest, backend: ChatBackend) -> IrDecision:
    """Ask the model for the action distribution and field probabilities."""
    if not cmd:
        raise ValueError("command must be nonempty")
    req = ChatRequest(system_prompt="", user_prompt=build_ir_prompt(cmd, manifest))
    try:
        response = backend.chat(req)
        parsed = parse_labeled_json(response.text, required=["action"], optional=["fields"])
    except ParseError as exc:
        raise StageFailure(f"ir action parse failed: {exc}") from exc
    action = str(parsed["action"]).upper()
    if action not in ACTIONS:
        raise StageFailure(f"unknown ir action {parsed['action']!r}")
    raw_fields = parsed.get("fields", {}) or {}
    if not isinstance(raw_fields, dict):
        raise StageFailure("ir fields must be an object")
    probs: dict[str, float] = {}
    for cid in manifest.ids:
        value = raw_fields.get(cid, 0.0)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise StageFailure(f"non-numeric field probability for {cid!r}")
        probs[cid] = min(1.0, max(0.0, float(value)))
    return IrDecision(action=action, field_probs=probs)


def threshold_fields(
    decision: IrDecision, tau: float = DEFAULT_THRESHOLD, manifest: ColumnManifest | None = None
) -> tuple[int, ...]:
    """Indicator bits per column: probability >= tau keeps the field.

    HIDE forces the zero vector regardless of the probabilities.
    """
    if not 0 < tau < 1:
        raise ValueError("threshold must lie strictly between 0 and 1")
    ids = manifest.ids if manifest is not None else sorted(decision.field_probs)
    if decision.action == "HIDE":
        return tuple(0 for _ in ids)
    return tuple(1 if decision.field_probs.get(cid, 0.0) >= tau else 0 for cid in ids)


def select_columns(y: tuple[int, ...], manifest: ColumnManifest) -> list[Column]:
    """Columns flagged in the indicator vector, in manifest order."""
    if len(y) != len(manifest.columns):
        raise ValueError("indicator length does not match manifest")
    return [col for col, bit in zip(manifest.columns, y) if bit]


def format_field(col: Column, value: Any) -> str:
    """One display line for a column value, per the column kind."""
    if value is None:
        return f"{col.label}: {MISSING_MARK}"
    if col.kind == KIND_COMPOSITE:
        if not isinstance(value, dict):
            return f"{col.label}: {MISSING_MARK}"
        template = col.template or " ".join("{%s}" % k for k in sorted(value))
        try:
            rendered = template.format(**value)
        except (KeyError, IndexError):
            return f"{col.label}: {MISSING_MARK}"
        return f"{col.label}: {rendered}"
    if col.kind == KIND_NUMBER:
        if isinstance(value, dict):
            num = value.get("value")
            unit = value.get("unit", col.unit)
        else:
            num, unit = value, col.unit
        if num is None:
            return f"{col.label}: {MISSING_MARK}"
        return f"{col.label}: {num} {unit}".rstrip()
    return f"{col.label}: {value}"


def compose_info_string(columns: list[Column], values: dict[str, Any]) -> str:
    """Newline-joined formatted fields in manifest order; empty set gives ''."""
    return "\n".join(format_field(col, values.get(col.id)) for col in columns)


def apply_ir(
    state: IrState,
    decision: IrDecision,
    manifest: ColumnManifest,
    record: dict[str, Any],
    fps: int = DEFAULT_FPS,
    tau: float = DEFAULT_THRESHOLD,
) -> tuple[IrState, OverlayTimeline]:
    """Produce the new overlay state and the clip's overlay timeline."""
    timeline = OverlayTimeline(fps=fps)
    if decision.action == "HIDE":
        new_state = IrState.empty(manifest)
        timeline.add_directive(
            OverlayDirective(
                kind=DirectiveKind.CLEAR,
                anchor="top_right",
                payload={},
                span=(0.0, 1.0 / fps),
            )
        )
        return new_state, timeline

    y = threshold_fields(decision, tau, manifest)
    columns = select_columns(y, manifest)
    s = compose_info_string(columns, record)
    new_state = IrState(y=y, s=s)
    timeline.add_directive(
        OverlayDirective(
            kind=DirectiveKind.TEXT,
            anchor="top_right",
            payload={"content": s},
            span=(0.0, CLIP_SECONDS),
        )
    )
    timeline.add_keyframes([(0.0, {"content": s})])
    return new_state, timeline


def reemit_ir(state: IrState, fps: int = DEFAULT_FPS) -> OverlayTimeline:
    """Timeline that keeps the current overlay as-is (empty command path)."""
    timeline = OverlayTimeline(fps=fps)
    if state.s:
        timeline.add_directive(
            OverlayDirective(
                kind=DirectiveKind.TEXT,
                anchor="top_right",
                payload={"content": state.s},
                span=(0.0, CLIP_SECONDS),
            )
        )
        timeline.add_keyframes([(0.0, {"content": state.s})])
    else:
        timeline.add_directive(
            OverlayDirective(
                kind=DirectiveKind.CLEAR, anchor="top_right", payload={}, span=(0.0, 1.0 / fps)
            )
        )
    return timeline


def default_manifest() -> ColumnManifest:
    from .. import resources

    return resources.column_manifest()


def dumps_decision(decision: IrDecision) -> str:
    return json.dumps({"action": decision.action, "fields": decision.field_probs})
