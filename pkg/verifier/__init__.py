"""
verifier - 外部演绎验证器的驱动与结果归一化
"""

from .models import Diagnostic, OutcomeKind, RawRun, VerificationOutcome, VerifierConfig
from .diagnostics import classify_outcome, parse_diagnostics
from .backends import (
    ExternalProcessBackend,
    ReplayBackend,
    ReplayStore,
    StubBackend,
    VerifierBackend,
    create_backend,
)
from .runner import verify, verify_many

__all__ = [
    "Diagnostic",
    "OutcomeKind",
    "RawRun",
    "VerificationOutcome",
    "VerifierConfig",
    "classify_outcome",
    "parse_diagnostics",
    "ExternalProcessBackend",
    "ReplayBackend",
    "ReplayStore",
    "StubBackend",
    "VerifierBackend",
    "create_backend",
    "verify",
    "verify_many",
]
