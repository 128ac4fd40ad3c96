"""Task-specific agents: clinical info overlay, CT viewer, 3D anatomy."""

from . import ar, ir, iv  # noqa: F401
