"""Voice-command surgical data assistant: orchestrated workflow engine,
task agents for clinical info / CT slices / 3D anatomy, and the evaluation
harness over the bundled command dataset."""

__version__ = "0.1.0"

from .model import FunctionId, SessionState, Status  # noqa: F401
