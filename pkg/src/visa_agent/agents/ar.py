"""Anatomy rendering agent: 3D structure visibility, viewpoints, rotation, zoom.

Zoom is a strict stack discipline: zooming in pushes the current (center,
scale, level) and doubles the scale; zooming out pops and restores exactly,
never below scale 1.0. Rotations are swing (30 degrees out-hold-return over
7 s) or full turns (360 degrees over 6 s).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

from ..errors import ParseError, StageFailure, UnknownStructure
from ..llm import ChatBackend, ChatRequest, parse_labeled_json
from ..model import CLIP_SECONDS
from ..prompts import TAG_AR_ACTION, quoted
from ..timeline import (
    DEFAULT_FPS,
    FULL_TURN_MODES,
    SWING_MODES,
    ZOOM_TRANSITION_S,
    DirectiveKind,
    OverlayDirective,
    OverlayTimeline,
    rotation_duration_s,
    rotation_profile,
)

STRUCTURE_LABELS = ("LLL", "LUL", "RLL", "RML", "RUL", "nodules", "trachea_bronchia")
VIEWPOINTS = ("anterior", "posterior", "left", "right", "superior", "inferior", "surgical")
ROTATION_MODES = ("static",) + SWING_MODES + FULL_TURN_MODES
ACTIONS = ("STATIC_VIEW", "ROTATE", "ZOOM_IN", "ZOOM_OUT", "REMOVE")

# Spoken-phrase shortcuts for structure sets.
STRUCTURE_ALIASES: dict[str, tuple[str, ...]] = {
    "airway": ("trachea_bronchia",),
    "trachea": ("trachea_bronchia",),
    "bronchia": ("trachea_bronchia",),
    "right lung": ("RUL", "RML", "RLL"),
    "left lung": ("LUL", "LLL"),
    "right upper lobe": ("RUL",),
    "right middle lobe": ("RML",),
    "right lower lobe": ("RLL",),
    "left upper lobe": ("LUL",),
    "left lower lobe": ("LLL",),
    "nodule": ("nodules",),
    "lung nodules": ("nodules",),
    "all": STRUCTURE_LABELS,
}


@dataclass(frozen=True)
class Structure:
    label: str
    centroid: tuple[float, float, float]
    bbox_min: tuple[float, float, float]
    bbox_max: tuple[float, float, float]
    is_lobe: bool
    contains_nodules: bool = False


@dataclass
class StructureManifest:
    structures: list[Structure]

    def __post_init__(self) -> None:
        labels = [s.label for s in self.structures]
        if sorted(labels) != sorted(STRUCTURE_LABELS):
            raise ValueError(f"manifest must contain exactly the labels {STRUCTURE_LABELS}")
        for s in self.structures:
            for c, lo, hi in zip(s.centroid, s.bbox_min, s.bbox_max):
                if not lo <= c <= hi:
                    raise ValueError(f"centroid of {s.label} lies outside its bbox")

    def structure(self, label: str) -> Structure:
        for s in self.structures:
            if s.label == label:
                return s
        raise UnknownStructure(label)

    def centroid(self, label: str) -> tuple[float, float, float]:
        return self.structure(label).centroid

    def model_center(self) -> tuple[float, float, float]:
        los = [min(s.bbox_min[i] for s in self.structures) for i in range(3)]
        his = [max(s.bbox_max[i] for s in self.structures) for i in range(3)]
        return tuple((lo + hi) / 2.0 for lo, hi in zip(los, his))

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> "StructureManifest":
        structures = [
            Structure(
                label=s["label"],
                centroid=tuple(s["centroid"]),
                bbox_min=tuple(s["bbox_min"]),
                bbox_max=tuple(s["bbox_max"]),
                is_lobe=bool(s["is_lobe"]),
                contains_nodules=bool(s.get("contains_nodules", False)),
            )
            for s in obj["structures"]
        ]
        return cls(structures=structures)


@dataclass
class ArState:
    """Visible structures, viewpoint, rotation mode, and zoom bookkeeping."""

    visible: set[str]
    view: str = "surgical"
    rotation: str = "static"
    target: str | None = None
    zoom_center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    zoom_scale: float = 1.0
    zoom_level: int = 0
    zoom_stack: list[tuple[tuple[float, float, float], float, int]] = field(default_factory=list)

    def copy(self) -> "ArState":
        return replace(self, visible=set(self.visible), zoom_stack=list(self.zoom_stack))

    def check_invariants(self) -> None:
        assert self.zoom_scale >= 1.0
        assert self.zoom_scale == 2.0**self.zoom_level
        assert self.zoom_level >= 0
        assert len(self.zoom_stack) == self.zoom_level

    def to_dict(self) -> dict[str, Any]:
        return {
            "visible": sorted(self.visible),
            "view": self.view,
            "rotation": self.rotation,
            "target": self.target,
            "zoom": {
                "center": list(self.zoom_center),
                "scale": self.zoom_scale,
                "level": self.zoom_level,
            },
            "zoom_stack_depth": len(self.zoom_stack),
        }


@dataclass
class ArDecision:
    action: str
    add: tuple[str, ...] = ()
    remove: tuple[str, ...] = ()
    view: str | None = None
    rotation: str | None = None
    target: str | None = None
    reset: bool = False

    def params_dict(self) -> dict[str, Any]:
        """Canonical parameter payload used for outcome scoring."""
        out: dict[str, Any] = {}
        if self.add:
            out["add"] = sorted(self.add)
        if self.remove:
            out["remove"] = sorted(self.remove)
        if self.view:
            out["view"] = self.view
        if self.rotation:
            out["rotation"] = self.rotation
        if self.target:
            out["target"] = self.target
        if self.reset:
            out["reset"] = True
        return out


def resolve_structures(names: Any) -> tuple[str, ...]:
    """Map labels or spoken aliases to canonical structure labels."""
    if names is None:
        return ()
    if isinstance(names, str):
        names = [names]
    resolved: list[str] = []
    for name in names:
        key = str(name).strip()
        if key in STRUCTURE_LABELS:
            resolved.append(key)
            continue
        alias = STRUCTURE_ALIASES.get(key.lower())
        if alias is None:
            raise UnknownStructure(key)
        resolved.extend(alias)
    seen: list[str] = []
    for label in resolved:
        if label not in seen:
            seen.append(label)
    return tuple(seen)


def build_ar_prompt(cmd: str, state: ArState) -> str:
    lines = [
        TAG_AR_ACTION,
        "You are the anatomy rendering agent controlling the 3D lung model overlay.",
        "",
        "Actions: STATIC_VIEW (show structures / change viewpoint), ROTATE,",
        "ZOOM_IN (toward a structure), ZOOM_OUT (one level back), REMOVE (hide all).",
        "",
        f"Structures: {', '.join(STRUCTURE_LABELS)}.",
        'Aliases: "airway" means trachea_bronchia; "right lung" means RUL, RML, RLL;',
        '"left lung" means LUL, LLL.',
        f"Viewpoints: {', '.join(VIEWPOINTS)} (surgical is the operating-table default).",
        "Rotations: left/right/up/down swing 30 degrees and return; horizontal/",
        "vertical are full 360-degree turns.",
        '"Reset"/"Initialize" restores the default structures and surgical view.',
        "",
        f"Currently visible: {', '.join(sorted(state.visible)) or '(none)'}",
        f"Current zoom target: {state.target or '(none)'}",
        f"Command: {quoted(cmd)}",
        "",
        "Answer with one JSON object like",
        '{"action": "STATIC_VIEW", "add": ["RLL"], "remove": [], "view": null,'
        ' "rotation": null, "target": null, "reset": false}.',
    ]
    return "\n".join(lines)


def determine_action_ar(cmd: str, state: ArState, backend: ChatBackend) -> ArDecision:
    """Ask the model for the action and scene parameters."""
    if not cmd:
        raise ValueError("command must be nonempty")
    req = ChatRequest(system_prompt="", user_prompt=build_ar_prompt(cmd, state))
    try:
        response = backend.chat(req)
        parsed = parse_labeled_json(
            response.text,
            required=["action"],
            optional=["add", "remove", "view", "rotation", "target", "reset"],
        )
    except ParseError as exc:
        raise StageFailure(f"ar action parse failed: {exc}") from exc
    action = str(parsed["action"]).upper()
    if action not in ACTIONS:
        raise StageFailure(f"unknown ar action {parsed['action']!r}")
    try:
        add = resolve_structures(parsed.get("add"))
        remove = resolve_structures(parsed.get("remove"))
        target = parsed.get("target")
        if target is not None:
            resolved = resolve_structures(target)
            if len(resolved) != 1:
                raise StageFailure(f"zoom target {target!r} must name one structure")
            target = resolved[0]
    except UnknownStructure as exc:
        raise StageFailure(f"unknown structure: {exc}") from exc
    view = parsed.get("view")
    if view is not None:
        view = str(view).lower()
        if view not in VIEWPOINTS:
            raise StageFailure(f"unknown viewpoint {view!r}")
    rotation = parsed.get("rotation")
    if rotation is not None:
        rotation = str(rotation).lower()
        if rotation not in ROTATION_MODES or rotation == "static":
            raise StageFailure(f"unknown rotation {rotation!r}")
    return ArDecision(
        action=action,
        add=add,
        remove=remove,
        view=view,
        rotation=rotation,
        target=target,
        reset=bool(parsed.get("reset", False)),
    )


def default_state(manifest: StructureManifest) -> ArState:
    """Default scene: nodule-bearing lobes plus all non-lobe structures."""
    visible = {
        s.label
        for s in manifest.structures
        if (s.is_lobe and s.contains_nodules) or not s.is_lobe
    }
    return ArState(
        visible=visible,
        view="surgical",
        rotation="static",
        target=None,
        zoom_center=manifest.model_center(),
        zoom_scale=1.0,
        zoom_level=0,
        zoom_stack=[],
    )


def update_structures(visible: set[str], add: tuple[str, ...], remove: tuple[str, ...]) -> set[str]:
    """Set update where removals win over additions."""
    return (visible | set(add)) - set(remove)


def zoom_in(state: ArState, target: str, manifest: StructureManifest) -> ArState:
    """Push the current zoom and descend one level toward the target."""
    centroid = manifest.centroid(target)  # raises UnknownStructure
    new = state.copy()
    new.zoom_stack.append((state.zoom_center, state.zoom_scale, state.zoom_level))
    new.zoom_center = centroid
    new.zoom_scale = state.zoom_scale * 2.0
    new.zoom_level = state.zoom_level + 1
    new.target = target
    return new


def zoom_out(state: ArState) -> ArState:
    """Pop one zoom level; at scale 1.0 (empty stack) nothing changes."""
    if not state.zoom_stack:
        return state.copy()
    new = state.copy()
    center, scale, level = new.zoom_stack.pop()
    new.zoom_center = center
    new.zoom_scale = scale
    new.zoom_level = level
    if not new.zoom_stack:
        new.target = None
    return new


def _scene_payload(state: ArState) -> dict[str, Any]:
    return {
        "visible": sorted(state.visible),
        "view": state.view,
        "zoom": {
            "center": list(state.zoom_center),
            "scale": state.zoom_scale,
            "level": state.zoom_level,
        },
    }


def _static_timeline(state: ArState, fps: int) -> OverlayTimeline:
    timeline = OverlayTimeline(fps=fps)
    timeline.add_directive(
        OverlayDirective(
            kind=DirectiveKind.SCENE,
            anchor="upper_right",
            payload=_scene_payload(state),
            span=(0.0, CLIP_SECONDS),
        )
    )
    timeline.add_keyframes([(0.0, _scene_payload(state))])
    return timeline


def _zoom_keyframes(
    old: ArState, new: ArState, fps: int, t_offset: float = 0.0
) -> list[tuple[float, dict[str, Any]]]:
    from ..timeline import interpolate_linear

    start = (*old.zoom_center, old.zoom_scale)
    end = (*new.zoom_center, new.zoom_scale)
    frames = interpolate_linear(start, end, ZOOM_TRANSITION_S, fps)
    return [
        (
            t_offset + i / fps,
            {"zoom": {"center": list(values[:3]), "scale": values[3]}},
        )
        for i, values in enumerate(frames)
    ]


def _rotation_keyframes(
    mode: str, fps: int, t_offset: float = 0.0
) -> list[tuple[float, dict[str, Any]]]:
    profile = rotation_profile(mode, fps)
    return [
        (t_offset + (i + 1) / fps, {"angle_deg": angle, "rotation": mode})
        for i, angle in enumerate(profile)
    ]


def apply_ar(
    state: ArState,
    decision: ArDecision,
    manifest: StructureManifest,
    fps: int = DEFAULT_FPS,
) -> tuple[ArState, OverlayTimeline]:
    """Produce the new scene state and the clip's overlay timeline."""
    if decision.reset:
        base = default_state(manifest)
    else:
        base = state.copy()

    if decision.action == "REMOVE":
        new_state = base
        new_state.visible = set()
        new_state.rotation = "static"
        timeline = OverlayTimeline(fps=fps)
        timeline.add_directive(
            OverlayDirective(
                kind=DirectiveKind.CLEAR, anchor="upper_right", payload={}, span=(0.0, 1.0 / fps)
            )
        )
        return new_state, timeline

    if decision.action == "STATIC_VIEW":
        new_state = base
        new_state.visible = update_structures(new_state.visible, decision.add, decision.remove)
        if decision.view:
            new_state.view = decision.view
        new_state.rotation = "static"
        return new_state, _static_timeline(new_state, fps)

    if decision.action == "ROTATE":
        if decision.rotation is None:
            raise StageFailure("ROTATE requires a rotation direction")
        new_state = base
        if decision.view:
            new_state.view = decision.view
        new_state.visible = update_structures(new_state.visible, decision.add, decision.remove)
        new_state.rotation = decision.rotation
        duration = rotation_duration_s(decision.rotation)
        timeline = OverlayTimeline(fps=fps)
        payload = _scene_payload(new_state)
        payload["rotation"] = decision.rotation
        timeline.add_directive(
            OverlayDirective(
                kind=DirectiveKind.SCENE,
                anchor="upper_right",
                payload=payload,
                span=(0.0, duration),
            )
        )
        timeline.add_keyframes(_rotation_keyframes(decision.rotation, fps))
        timeline.truncate_to_clip()
        return new_state, timeline

    if decision.action == "ZOOM_IN":
        target = decision.target or base.target
        if target is None:
            raise StageFailure("ZOOM_IN requires a target structure")
        new_state = zoom_in(base, target, manifest)
        timeline = OverlayTimeline(fps=fps)
        payload = _scene_payload(new_state)
        payload["transition"] = "zoom_in"
        timeline.add_directive(
            OverlayDirective(
                kind=DirectiveKind.SCENE,
                anchor="upper_right",
                payload=payload,
                span=(0.0, ZOOM_TRANSITION_S),
            )
        )
        timeline.add_keyframes(_zoom_keyframes(base, new_state, fps))
        if decision.rotation:
            new_state.rotation = decision.rotation
            timeline.add_keyframes(_rotation_keyframes(decision.rotation, fps, ZOOM_TRANSITION_S))
            timeline.truncate_to_clip()
        return new_state, timeline

    # ZOOM_OUT
    new_state = zoom_out(base)
    timeline = OverlayTimeline(fps=fps)
    if new_state.zoom_scale == base.zoom_scale and new_state.zoom_center == base.zoom_center:
        return new_state, _static_timeline(new_state, fps)
    payload = _scene_payload(new_state)
    payload["transition"] = "zoom_out"
    timeline.add_directive(
        OverlayDirective(
            kind=DirectiveKind.SCENE,
            anchor="upper_right",
            payload=payload,
            span=(0.0, ZOOM_TRANSITION_S),
        )
    )
    timeline.add_keyframes(_zoom_keyframes(base, new_state, fps))
    return new_state, timeline


def reemit_ar(state: ArState, fps: int = DEFAULT_FPS) -> OverlayTimeline:
    """Timeline that re-shows the current scene without changing state."""
    if not state.visible:
        timeline = OverlayTimeline(fps=fps)
        timeline.add_directive(
            OverlayDirective(
                kind=DirectiveKind.CLEAR, anchor="upper_right", payload={}, span=(0.0, 1.0 / fps)
            )
        )
        return timeline
    return _static_timeline(state, fps)
