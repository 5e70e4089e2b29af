"""
Exception hierarchy for the locpir package.

Every error raised on purpose by the library derives from ``LocPirError`` and from
the builtin exception that best describes it, so callers may catch either.
"""

from __future__ import annotations

from enum import IntEnum
from typing import Optional


class LocPirError(Exception):
    """Base class for all locpir errors."""


class ParameterError(LocPirError, ValueError):
    """Invalid scheme parameters, fixed-point formats or bench configuration."""


class DimensionMismatchError(LocPirError, ValueError):
    """Two samples, or a sample and a key, do not share the same dimension."""


class EngineMismatchError(LocPirError, TypeError):
    """Cipher bits produced by different gate engines were combined."""


class EncodingRangeError(LocPirError, ValueError):
    """A value is not representable in the requested fixed-point format."""


class ServiceOverflowError(LocPirError, ValueError):
    """A service value does not fit into m bits."""


class SheetReuseError(LocPirError, RuntimeError):
    """A zero sample of a preprocessing sheet was consumed twice."""


class NoiseBudgetError(LocPirError, RuntimeError):
    """A pre-bootstrap linear combination came too close to the decision boundary."""


class BenchmarkMismatchError(LocPirError, RuntimeError):
    """A benchmark run disagreed with the gate-count model or returned the wrong service."""


class DatasetError(LocPirError, ValueError):
    """A region table could not be loaded or failed validation."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ErrorCode(IntEnum):
    """Reason codes carried by ERROR frames."""

    PHASE = 1
    LENGTH = 2
    UNKNOWN_TYPE = 3
    MALFORMED = 4
    RANGE = 5
    INTERNAL = 6


class ProtocolError(LocPirError):
    """A frame violated the wire format or the session state machine."""

    def __init__(self, code: ErrorCode, message: str):
        self.code = ErrorCode(code)
        super().__init__(message)
