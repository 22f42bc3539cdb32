"""screenflow: questionnaire experiments as code.

Design questionnaires declaratively, run them as deterministic screen
sequences, capture behavioral telemetry, randomize reproducibly, collect
results as CSV, and keep multiple devices in step over WebSockets.
"""

__version__ = "0.1.0"

from .engine import Session, create_session, restore  # noqa: F401
from .qspec import QuestionnaireSpec, parse_spec, serialize_spec, validate  # noqa: F401
