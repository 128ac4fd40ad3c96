"""Overlay directives and keyframe generation shared by the task agents.

Two sampling conventions are used deliberately:

* ``interpolate_linear`` returns ``round(duration * fps)`` samples including
  both endpoints (first == from, last == to), so a 5 s move at 30 fps yields
  150 keyframes starting exactly at the old position.
* ``rotation_profile`` samples at t = i/fps for i = 1..duration*fps, so the
  profile hits its landmark angles on exact frames (30 degrees at frame 90 of
  a 3-1-3 swing, 360 degrees on the final frame of a full turn).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from .model import CLIP_SECONDS

DEFAULT_FPS = 30

ROTATE_SWING_DEG = 30.0
SWING_MOVE_S = 3.0
SWING_HOLD_S = 1.0
SWING_RETURN_S = 3.0
FULL_TURN_S = 6.0
ZOOM_TRANSITION_S = 3.0
MOVE_TRANSITION_S = 5.0

SWING_MODES = ("left", "right", "up", "down")
FULL_TURN_MODES = ("horizontal", "vertical")


class DirectiveKind:
    TEXT = "text_overlay"
    CLEAR = "clear_overlay"
    CT_SMALL = "ct_small_views"
    CT_ZOOM = "ct_zoom_view"
    SCENE = "scene_3d"


@dataclass(frozen=True)
class OverlayDirective:
    """One overlay effect over a time span within the clip."""

    kind: str
    anchor: str
    payload: dict[str, Any]
    span: tuple[float, float]

    def __post_init__(self) -> None:
        t0, t1 = self.span
        if not t0 < t1:
            raise ValueError(f"directive span must satisfy t0 < t1, got {self.span}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "anchor": self.anchor,
            "payload": self.payload,
            "span": list(self.span),
        }


@dataclass
class OverlayTimeline:
    """Discretized overlay output for one clip: directives plus keyframe samples."""

    fps: int = DEFAULT_FPS
    directives: list[OverlayDirective] = field(default_factory=list)
    keyframes: list[tuple[float, dict[str, Any]]] = field(default_factory=list)
    truncated: bool = False

    def add_directive(self, directive: OverlayDirective) -> None:
        self.directives.append(directive)

    def add_keyframes(self, frames: list[tuple[float, dict[str, Any]]]) -> None:
        if self.keyframes and frames and frames[0][0] <= self.keyframes[-1][0]:
            raise ValueError("keyframe times must be strictly increasing")
        self.keyframes.extend(frames)

    def truncate_to_clip(self, clip_s: float = CLIP_SECONDS) -> None:
        """Drop anything past the clip boundary, flagging that it happened."""
        kept = [(t, v) for t, v in self.keyframes if t <= clip_s]
        if len(kept) != len(self.keyframes):
            self.keyframes = kept
            self.truncated = True
        clipped = []
        for d in self.directives:
            t0, t1 = d.span
            if t0 >= clip_s:
                self.truncated = True
                continue
            if t1 > clip_s:
                self.truncated = True
                d = OverlayDirective(d.kind, d.anchor, d.payload, (t0, clip_s))
            clipped.append(d)
        self.directives = clipped

    def to_dict(self) -> dict[str, Any]:
        return {
            "fps": self.fps,
            "truncated": self.truncated,
            "directives": [d.to_dict() for d in self.directives],
            "keyframes": [{"t": t, "values": v} for t, v in self.keyframes],
        }


def round_half_away(x: float) -> int:
    """Round with ties going away from zero (2.5 -> 3, -2.5 -> -3)."""
    return int(math.floor(x + 0.5)) if x >= 0 else int(math.ceil(x - 0.5))


def interpolate_linear(
    start: tuple[float, ...],
    end: tuple[float, ...],
    duration_s: float,
    fps: int = DEFAULT_FPS,
    integral: bool = False,
) -> list[tuple[float, ...]]:
    """Linear ramp from ``start`` to ``end`` with both endpoints included.

    Returns round(duration_s * fps) samples (minimum one; a single-sample
    ramp collapses to the destination). With ``integral`` each component is
    rounded half-away-from-zero per sample.
    """
    if duration_s <= 0:
        raise ValueError("duration must be positive")
    if len(start) != len(end):
        raise ValueError("vector lengths differ")
    n = max(1, round_half_away(duration_s * fps))
    if n == 1:
        frames = [tuple(end)]
    else:
        frames = [tuple(start)]
        for i in range(1, n - 1):
            f = i / (n - 1)
            frames.append(tuple(a + (b - a) * f for a, b in zip(start, end)))
        frames.append(tuple(end))
    if integral:
        frames = [tuple(float(round_half_away(v)) for v in frame) for frame in frames]
    return frames


def rotation_profile(mode: str, fps: int = DEFAULT_FPS) -> list[float]:
    """Angle samples (degrees) for a rotation command.

    Swing modes run 0 -> 30 degrees over 3 s, hold 1 s, return over 3 s
    (7 s total). Full-turn modes sweep 0 -> 360 degrees over 6 s.
    """
    if mode in SWING_MODES:
        total = SWING_MOVE_S + SWING_HOLD_S + SWING_RETURN_S
        angles = []
        for i in range(1, int(round(total * fps)) + 1):
            t = i / fps
            if t <= SWING_MOVE_S:
                angles.append(ROTATE_SWING_DEG * t / SWING_MOVE_S)
            elif t <= SWING_MOVE_S + SWING_HOLD_S:
                angles.append(ROTATE_SWING_DEG)
            else:
                back = (t - SWING_MOVE_S - SWING_HOLD_S) / SWING_RETURN_S
                angles.append(ROTATE_SWING_DEG * (1.0 - back))
        return angles
    if mode in FULL_TURN_MODES:
        return [360.0 * (i / fps) / FULL_TURN_S for i in range(1, int(round(FULL_TURN_S * fps)) + 1)]
    raise ValueError(f"no rotation profile for mode {mode!r}")


def rotation_duration_s(mode: str) -> float:
    if mode in SWING_MODES:
        return SWING_MOVE_S + SWING_HOLD_S + SWING_RETURN_S
    if mode in FULL_TURN_MODES:
        return FULL_TURN_S
    raise ValueError(f"no rotation profile for mode {mode!r}")
