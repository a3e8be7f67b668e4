"""
Error types for MuskatLab.

Every error raised by the library derives from MuskatLabError and carries an
error code understood by get_user_friendly_error_message.
"""

from typing import Optional

from .logging import get_user_friendly_error_message


class MuskatLabError(Exception):
    """Base class for all MuskatLab errors."""

    error_code = 'GENERAL_ERROR'

    def __init__(self, message: str):
        super().__init__(message)
        self.detail = message

    def user_message(self) -> str:
        """Return the message shown to command line users."""
        return get_user_friendly_error_message(self.error_code, str(self))


class ConfigurationError(MuskatLabError):
    """Invalid grid, parameter or quadrature settings."""

    error_code = 'CONFIG_INVALID'


class ConfigParseError(ConfigurationError):
    """Malformed or unknown entry in a flat configuration file."""

    error_code = 'CONFIG_PARSE_ERROR'

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainViolationError(MuskatLabError):
    """Non-finite samples, non-decaying line fields or a wrong grid kind."""

    error_code = 'DOMAIN_VIOLATION'


class PreconditionError(MuskatLabError):
    """An operation was called outside its hypotheses."""

    error_code = 'PRECONDITION_FAILED'


class IntegrationError(MuskatLabError):
    """A time step produced non-finite values."""

    error_code = 'INTEGRATION_FAILED'

    def __init__(self, message: str, stage: Optional[int] = None,
                 time: Optional[float] = None, step: Optional[int] = None):
        self.reason = message
        self.stage = stage
        self.time = time
        self.step = step
        parts = [message]
        if stage is not None:
            parts.append(f"stage={stage}")
        if step is not None:
            parts.append(f"step={step}")
        if time is not None:
            parts.append(f"t={time:.6g}")
        super().__init__(' '.join(parts))

    def annotate(self, time: float, step: int) -> 'IntegrationError':
        """Return a copy of this error carrying the failing step and time."""
        return IntegrationError(self.reason, stage=self.stage, time=time, step=step)


class UnsupportedSchemeError(MuskatLabError):
    """The requested time-stepping scheme cannot run on this grid."""

    error_code = 'UNSUPPORTED_SCHEME'


class DiagnosticsError(MuskatLabError):
    """Degenerate series handed to a fit or a check."""

    error_code = 'DIAGNOSTICS_ERROR'


class OutputError(MuskatLabError):
    """A result file could not be written."""

    error_code = 'OUTPUT_ERROR'
