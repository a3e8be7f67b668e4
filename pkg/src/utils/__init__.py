"""
Utility modules for MuskatLab.

This package contains the logging setup, the error hierarchy and the thread
pool helper used by the quadrature kernels.
"""

from .logging import (
    setup_logging, log_exception, get_user_friendly_error_message,
    LOG_LEVELS, JSONFormatter, ColoredConsoleFormatter
)
from .errors import (
    MuskatLabError, ConfigurationError, ConfigParseError, DomainViolationError,
    PreconditionError, IntegrationError, UnsupportedSchemeError, DiagnosticsError,
    OutputError
)
from .parallel import set_thread_count, get_thread_count, parallel_map

__all__ = [
    # Logging
    'setup_logging', 'log_exception', 'get_user_friendly_error_message',
    'LOG_LEVELS', 'JSONFormatter', 'ColoredConsoleFormatter',

    # Errors
    'MuskatLabError', 'ConfigurationError', 'ConfigParseError', 'DomainViolationError',
    'PreconditionError', 'IntegrationError', 'UnsupportedSchemeError', 'DiagnosticsError',
    'OutputError',

    # Parallelism
    'set_thread_count', 'get_thread_count', 'parallel_map'
]
