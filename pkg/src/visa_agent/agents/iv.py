"""Image viewer agent: CT slice navigation over three orthogonal planes.

State is three bounded slice positions plus a display mode (hidden, three
small views, or one zoomed main view). Moves can be relative deltas,
absolute targets, or the named positions min/middle/max, and every
transition animates positions over five seconds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from ..errors import OutOfBounds, ParseError, StageFailure
from ..llm import ChatBackend, ChatRequest, parse_labeled_json
from ..model import CLIP_SECONDS
from ..prompts import TAG_IV_ACTION, quoted
from ..timeline import (
    DEFAULT_FPS,
    MOVE_TRANSITION_S,
    DirectiveKind,
    OverlayDirective,
    OverlayTimeline,
    interpolate_linear,
)

PLANES = ("axial", "coronal", "sagittal")
ACTIONS = ("SHOW_MOVE", "ZOOM_IN_MOVE", "ZOOM_OUT", "REMOVE")
DISPLAY_MODES = ("none", "small_views", "zoom_view")
NAMED_TARGETS = ("min", "middle", "max")
DEFAULT_STEP = 10

# Direction word -> (plane, sign); bare words move one default step.
DIRECTION_LEXICON: dict[str, tuple[str, int]] = {
    "right": ("sagittal", +1),
    "left": ("sagittal", -1),
    "up": ("axial", +1),
    "down": ("axial", -1),
    "forward": ("coronal", +1),
    "front": ("coronal", +1),
    "backward": ("coronal", -1),
    "posterior": ("coronal", -1),
}


@dataclass
class Volume:
    """Scalar CT volume; voxels may be materialized or a synthetic gradient."""

    dims: tuple[int, int, int]  # (nx, ny, nz)
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    axis_map: dict[str, int] = field(
        default_factory=lambda: {"sagittal": 0, "coronal": 1, "axial": 2}
    )
    voxels: np.ndarray | None = None
    synth: str | None = None  # "gradient:<axis>" when voxels are implicit

    def __post_init__(self) -> None:
        if any(d <= 0 for d in self.dims):
            raise ValueError("volume dims must be positive")
        if set(self.axis_map) != set(PLANES) or sorted(self.axis_map.values()) != [0, 1, 2]:
            raise ValueError("axis_map must assign axial/coronal/sagittal to axes 0..2")
        if self.voxels is not None and tuple(self.voxels.shape) != tuple(self.dims):
            raise ValueError("voxel array shape does not match dims")

    @classmethod
    def gradient(cls, dims: tuple[int, int, int], axis: int = 2, materialize: bool = False) -> "Volume":
        """Volume whose value equals the coordinate along one axis."""
        vol = cls(dims=tuple(dims), synth=f"gradient:{axis}")
        if materialize:
            shape = [1, 1, 1]
            shape[axis] = dims[axis]
            ramp = np.arange(dims[axis], dtype=np.int32).reshape(shape)
            vol.voxels = np.broadcast_to(ramp, dims).copy()
            vol.synth = None
        return vol

    def plane_dims(self) -> dict[str, int]:
        return {plane: self.dims[axis] for plane, axis in self.axis_map.items()}

    def save(self, path: str) -> None:
        """Single-file format: one JSON header line, then little-endian voxels."""
        voxels = self.voxels
        if voxels is None:
            raise ValueError("cannot save a synthetic volume without materializing it")
        header = {
            "dims": list(self.dims),
            "spacing": list(self.spacing),
            "dtype": str(voxels.dtype),
            "axis_map": self.axis_map,
        }
        with open(path, "wb") as fh:
            fh.write(json.dumps(header).encode("utf-8") + b"\n")
            fh.write(voxels.astype(voxels.dtype.newbyteorder("<")).tobytes(order="C"))

    @classmethod
    def load(cls, path: str) -> "Volume":
        with open(path, "rb") as fh:
            header = json.loads(fh.readline().decode("utf-8"))
            blob = fh.read()
        dims = tuple(header["dims"])
        dtype = np.dtype(header["dtype"]).newbyteorder("<")
        expected = dims[0] * dims[1] * dims[2] * dtype.itemsize
        if len(blob) != expected:
            raise ValueError(f"voxel blob is {len(blob)} bytes, expected {expected}")
        voxels = np.frombuffer(blob, dtype=dtype).reshape(dims)
        return cls(
            dims=dims,
            spacing=tuple(header.get("spacing", (1.0, 1.0, 1.0))),
            axis_map={k: int(v) for k, v in header["axis_map"].items()},
            voxels=voxels,
        )


@dataclass
class IvState:
    """Slice positions, display mode, and the main view plane."""

    positions: dict[str, int]
    display: str = "none"
    main_view: str = "axial"

    @classmethod
    def default(cls, vol: Volume) -> "IvState":
        dims = vol.plane_dims()
        return cls(
            positions={plane: dims[plane] // 2 for plane in PLANES},
            display="none",
            main_view="axial",
        )

    def copy(self) -> "IvState":
        return replace(self, positions=dict(self.positions))

    def to_dict(self) -> dict[str, Any]:
        return {
            "positions": dict(self.positions),
            "display": self.display,
            "main_view": self.main_view,
        }


@dataclass
class IvDecision:
    action: str
    moves: dict[str, dict[str, Any]] = field(default_factory=dict)
    main_view: str | None = None
    reset: bool = False

    def params_dict(self) -> dict[str, Any]:
        """Canonical parameter payload used for outcome scoring."""
        out: dict[str, Any] = {}
        if self.moves:
            out["moves"] = {p: dict(m) for p, m in sorted(self.moves.items())}
        if self.main_view:
            out["main_view"] = self.main_view
        if self.reset:
            out["reset"] = True
        return out


def build_iv_prompt(cmd: str, state: IvState) -> str:
    lines = [
        TAG_IV_ACTION,
        "You are the image viewer agent controlling CT slice views on the",
        "axial, coronal, and sagittal planes.",
        "",
        "Actions: SHOW_MOVE (show/move the three small views), ZOOM_IN_MOVE",
        "(one large main view, optionally moving), ZOOM_OUT (back to small",
        "views), REMOVE (hide all CT views).",
        "",
        "Direction words: right = sagittal +, left = sagittal -, up = axial +,",
        "down = axial -, forward/front = coronal +, backward/posterior = coronal -.",
        f"A bare direction word moves {DEFAULT_STEP} units; a repeated word multiplies",
        'that step ("front, front, front" means coronal +30).',
        'Named positions min/middle/max are written {"to": "middle"}; absolute',
        'targets {"abs": 200}; relative steps {"rel": -30}.',
        'Unlabeled position lists apply to axial, coronal, sagittal in order.',
        '"Reset" restores the default middle positions.',
        "",
        f"Current positions: {json.dumps(state.positions)}",
        f"Command: {quoted(cmd)}",
        "",
        "Answer with one JSON object like",
        '{"action": "SHOW_MOVE", "moves": {"coronal": {"rel": 100}}, "main_view": null}.',
    ]
    return "\n".join(lines)


def determine_action_iv(cmd: str, state: IvState, backend: ChatBackend) -> IvDecision:
    """Ask the model for the action and movement parameters."""
    if not cmd:
        raise ValueError("command must be nonempty")
    req = ChatRequest(system_prompt="", user_prompt=build_iv_prompt(cmd, state))
    try:
        response = backend.chat(req)
        parsed = parse_labeled_json(
            response.text, required=["action"], optional=["moves", "main_view", "reset"]
        )
    except ParseError as exc:
        raise StageFailure(f"iv action parse failed: {exc}") from exc
    action = str(parsed["action"]).upper()
    if action not in ACTIONS:
        raise StageFailure(f"unknown iv action {parsed['action']!r}")
    moves = _validate_moves(parsed.get("moves") or {})
    if action in ("ZOOM_OUT", "REMOVE") and moves:
        raise StageFailure(f"{action} must not carry movement deltas")
    main_view = parsed.get("main_view")
    if main_view is not None:
        main_view = str(main_view).lower()
        if main_view not in PLANES:
            raise StageFailure(f"unknown plane {main_view!r}")
    return IvDecision(
        action=action, moves=moves, main_view=main_view, reset=bool(parsed.get("reset", False))
    )


def _validate_moves(raw: Any) -> dict[str, dict[str, Any]]:
    if not isinstance(raw, dict):
        raise StageFailure("moves must be an object keyed by plane")
    moves: dict[str, dict[str, Any]] = {}
    for plane, move in raw.items():
        if plane not in PLANES:
            raise StageFailure(f"unknown plane {plane!r}")
        if not isinstance(move, dict) or len(move) != 1:
            raise StageFailure(f"move for {plane} must have exactly one of rel/abs/to")
        key, value = next(iter(move.items()))
        if key in ("rel", "abs"):
            if isinstance(value, bool) or not isinstance(value, int):
                raise StageFailure(f"{key} move for {plane} must be an integer")
            moves[plane] = {key: int(value)}
        elif key == "to":
            if value not in NAMED_TARGETS:
                raise StageFailure(f"named target for {plane} must be one of {NAMED_TARGETS}")
            moves[plane] = {"to": value}
        else:
            raise StageFailure(f"unknown move key {key!r} for {plane}")
    return moves


def update_positions(
    positions: dict[str, int],
    decision: IvDecision,
    bounds: dict[str, int],
) -> dict[str, int]:
    """Apply moves and clamp every plane into [0, dim-1]."""
    new = dict(positions)
    if decision.reset:
        new = {plane: bounds[plane] // 2 for plane in PLANES}
    for plane, move in decision.moves.items():
        dim = bounds[plane]
        if "rel" in move:
            target = new[plane] + move["rel"]
        elif "abs" in move:
            target = move["abs"]
        else:
            target = {"min": 0, "middle": dim // 2, "max": dim - 1}[move["to"]]
        new[plane] = target
    return {plane: max(0, min(bounds[plane] - 1, p)) for plane, p in new.items()}


def slice_volume(vol: Volume, plane: str, index: int) -> np.ndarray:
    """Orthogonal slice at the given index, row-major in fixed axis order."""
    if plane not in PLANES:
        raise ValueError(f"unknown plane {plane!r}")
    axis = vol.axis_map[plane]
    if not 0 <= index < vol.dims[axis]:
        raise OutOfBounds(f"{plane} index {index} outside [0, {vol.dims[axis] - 1}]")
    if vol.voxels is not None:
        return np.take(vol.voxels, index, axis=axis)
    grad_axis = int(vol.synth.split(":", 1)[1])
    other_axes = [a for a in range(3) if a != axis]
    shape = tuple(vol.dims[a] for a in other_axes)
    if grad_axis == axis:
        return np.full(shape, index, dtype=np.int32)
    pos = other_axes.index(grad_axis)
    ramp = np.arange(vol.dims[grad_axis], dtype=np.int32)
    if pos == 0:
        return np.broadcast_to(ramp[:, None], shape).copy()
    return np.broadcast_to(ramp[None, :], shape).copy()


def infer_main_view(decision: IvDecision, state: IvState) -> str:
    """Explicit view wins; else a single moved axis; else the current view."""
    if decision.main_view:
        return decision.main_view
    moved = [plane for plane in PLANES if plane in decision.moves]
    if len(moved) == 1:
        return moved[0]
    return state.main_view


def apply_iv(
    state: IvState,
    decision: IvDecision,
    vol: Volume,
    fps: int = DEFAULT_FPS,
) -> tuple[IvState, OverlayTimeline]:
    """Produce the new viewer state and the clip's overlay timeline."""
    bounds = vol.plane_dims()
    timeline = OverlayTimeline(fps=fps)

    if decision.action == "REMOVE":
        new_state = replace(state, positions=dict(state.positions), display="none")
        timeline.add_directive(
            OverlayDirective(
                kind=DirectiveKind.CLEAR, anchor="right", payload={}, span=(0.0, 1.0 / fps)
            )
        )
        return new_state, timeline

    if decision.action == "ZOOM_OUT":
        new_state = replace(state, positions=dict(state.positions), display="small_views")
        timeline.add_directive(
            OverlayDirective(
                kind=DirectiveKind.CT_SMALL,
                anchor="right",
                payload={"positions": dict(state.positions)},
                span=(0.0, CLIP_SECONDS),
            )
        )
        timeline.add_keyframes([(0.0, {"positions": dict(state.positions)})])
        return new_state, timeline

    new_positions = update_positions(state.positions, decision, bounds)
    if decision.action == "SHOW_MOVE":
        display = "small_views"
        main_view = state.main_view if not decision.reset else "axial"
        kind = DirectiveKind.CT_SMALL
        payload: dict[str, Any] = {"from": dict(state.positions), "to": dict(new_positions)}
    else:  # ZOOM_IN_MOVE
        display = "zoom_view"
        main_view = infer_main_view(decision, state)
        kind = DirectiveKind.CT_ZOOM
        payload = {
            "plane": main_view,
            "from": dict(state.positions),
            "to": dict(new_positions),
        }

    start = tuple(float(state.positions[p]) for p in PLANES)
    end = tuple(float(new_positions[p]) for p in PLANES)
    frames = interpolate_linear(start, end, MOVE_TRANSITION_S, fps, integral=True)
    timeline.add_directive(
        OverlayDirective(
            kind=kind,
            anchor="right" if kind == DirectiveKind.CT_SMALL else "center",
            payload=payload,
            span=(0.0, MOVE_TRANSITION_S),
        )
    )
    timeline.add_keyframes(
        [
            (i / fps, {"positions": {p: int(v) for p, v in zip(PLANES, values)}})
            for i, values in enumerate(frames)
        ]
    )
    new_state = IvState(positions=new_positions, display=display, main_view=main_view)
    return new_state, timeline


def reemit_iv(state: IvState, fps: int = DEFAULT_FPS) -> OverlayTimeline:
    """Timeline that re-shows the current display without changing state."""
    timeline = OverlayTimeline(fps=fps)
    if state.display == "none":
        timeline.add_directive(
            OverlayDirective(
                kind=DirectiveKind.CLEAR, anchor="right", payload={}, span=(0.0, 1.0 / fps)
            )
        )
        return timeline
    kind = DirectiveKind.CT_SMALL if state.display == "small_views" else DirectiveKind.CT_ZOOM
    payload: dict[str, Any] = {"positions": dict(state.positions)}
    if state.display == "zoom_view":
        payload["plane"] = state.main_view
    timeline.add_directive(
        OverlayDirective(
            kind=kind,
            anchor="right" if kind == DirectiveKind.CT_SMALL else "center",
            payload=payload,
            span=(0.0, CLIP_SECONDS),
        )
    )
    timeline.add_keyframes([(0.0, {"positions": dict(state.positions)})])
    return timeline


def pack_slice_png(image: np.ndarray) -> bytes:
    """Render a slice as an 8-bit grayscale PNG (service thumbnail support)."""
    from PIL import Image

    arr = np.asarray(image, dtype=np.float64)
    lo, hi = float(arr.min()), float(arr.max())
    if hi > lo:
        arr = (arr - lo) / (hi - lo) * 255.0
    else:
        arr = np.zeros_like(arr)
    img = Image.fromarray(arr.astype(np.uint8), mode="L")
    import io

    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()
