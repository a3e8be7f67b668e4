"""
Logging module for MuskatLab.

This module provides the logging setup shared by the command line and the
acceptance suite: verbosity levels, colored console output on stderr, rotating
log files with an error-only companion, optional JSON records, and the
user-friendly messages attached to MuskatLab error codes.
"""

import os
import sys
import json
import logging
import logging.handlers
from typing import Optional

# Define log levels
LOG_LEVELS = {
    'DEBUG': logging.DEBUG,
    'INFO': logging.INFO,
    'WARNING': logging.WARNING,
    'ERROR': logging.ERROR,
    'CRITICAL': logging.CRITICAL
}

APP_LOGGER_NAME = 'muskat_lab'


class JSONFormatter(logging.Formatter):
    """
    Format log records as JSON objects.

    Run metadata passed through ``extra={'run': {...}}`` is carried into
    the record under the ``run`` key.
    """

    def format(self, record: logging.LogRecord) -> str:
        """
        Format log record as JSON.

        Args:
            record: Log record to format

        Returns:
            str: JSON-formatted log record
        """
        log_data = {
            'timestamp': self.formatTime(record, self.datefmt),
            'level': record.levelname,
            'name': record.name,
            'message': record.getMessage(),
            'module': record.module,
            'function': record.funcName,
            'line': record.lineno
        }

        run = getattr(record, 'run', None)
        if isinstance(run, dict):
            log_data['run'] = run

        if record.exc_info:
            log_data['exception'] = self.formatException(record.exc_info)

        return json.dumps(log_data, sort_keys=True)


class ColoredConsoleFormatter(logging.Formatter):
    """Format log records with ANSI colors for terminal output."""

    # ANSI color codes
    COLORS = {
        'DEBUG': '\033[38;5;246m',  # Gray
        'INFO': '\033[38;5;39m',    # Blue
        'WARNING': '\033[38;5;208m',  # Orange
        'ERROR': '\033[38;5;196m',   # Red
        'CRITICAL': '\033[48;5;196;38;5;231m',  # White on Red
        'RESET': '\033[0m'
    }

    def __init__(self, fmt: Optional[str] = None, use_color: bool = True):
        super().__init__(fmt)
        self.use_color = use_color

    def format(self, record: logging.LogRecord) -> str:
        formatted_message = super().format(record)
        if not self.use_color:
            return formatted_message

        level_color = self.COLORS.get(record.levelname, self.COLORS['RESET'])
        colored_level = f"{level_color}{record.levelname}{self.COLORS['RESET']}"
        return formatted_message.replace(record.levelname, colored_level, 1)


def setup_logging(
    log_dir: Optional[str] = None,
    log_level: str = 'INFO',
    enable_console: bool = True,
    enable_file: bool = True,
    max_size_mb: int = 10,
    rotation_count: int = 5,
    include_timestamps: bool = True,
    json_format: bool = False,
    config_manager=None
) -> logging.Logger:
    """
    Set up the logging system.

    Console output goes to stderr so that stdout carries only report lines.

    Args:
        log_dir: Directory for log files (no files are written when None)
        log_level: Log level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        enable_console: Whether to enable console logging
        enable_file: Whether to enable file logging
        max_size_mb: Maximum size of log files in MB
        rotation_count: Number of log files to keep
        include_timestamps: Whether to include timestamps in log messages
        json_format: Whether to use JSON format for log files
        config_manager: Optional configuration manager to get settings from

    Returns:
        Logger: Application logger
    """
    if config_manager:
        logs = config_manager.get('logs', default={}) or {}
        log_dir = logs.get('dir') or log_dir
        log_level = logs.get('level', log_level)
        max_size_mb = logs.get('max_size_mb', max_size_mb)
        rotation_count = logs.get('rotation_count', rotation_count)
        include_timestamps = logs.get('include_timestamps', include_timestamps)
        json_format = logs.get('json_format', json_format)

    if enable_file and log_dir:
        os.makedirs(log_dir, exist_ok=True)

    numeric_level = LOG_LEVELS.get(str(log_level).upper(), logging.INFO)

    root_logger = logging.getLogger()
    root_logger.setLevel(numeric_level)

    logger = logging.getLogger(APP_LOGGER_NAME)
    logger.setLevel(numeric_level)

    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)
        handler.close()

    log_format = '%(levelname)s - %(name)s - %(message)s'
    if include_timestamps:
        log_format = '%(asctime)s - ' + log_format

    if enable_console:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(numeric_level)
        console_handler.setFormatter(
            ColoredConsoleFormatter(log_format, use_color=sys.stderr.isatty())
        )
        root_logger.addHandler(console_handler)

    if enable_file and log_dir:
        general_handler = logging.handlers.RotatingFileHandler(
            os.path.join(log_dir, f'{APP_LOGGER_NAME}.log'),
            maxBytes=max_size_mb * 1024 * 1024,
            backupCount=rotation_count,
            encoding='utf-8'
        )
        general_handler.setLevel(numeric_level)

        error_handler = logging.handlers.RotatingFileHandler(
            os.path.join(log_dir, f'{APP_LOGGER_NAME}_error.log'),
            maxBytes=max_size_mb * 1024 * 1024,
            backupCount=rotation_count,
            encoding='utf-8'
        )
        error_handler.setLevel(logging.ERROR)

        for handler in (general_handler, error_handler):
            if json_format:
                handler.setFormatter(JSONFormatter())
            else:
                handler.setFormatter(logging.Formatter(log_format))
            root_logger.addHandler(handler)

    logger.debug(f"Logging system initialized with level {log_level}")

    return logger


def log_exception(e: Exception, logger: Optional[logging.Logger] = None) -> None:
    """
    Log an exception with stack trace.

    Args:
        e: Exception to log
        logger: Logger to use (if None, uses the application logger)
    """
    if logger is None:
        logger = logging.getLogger(APP_LOGGER_NAME)

    logger.error(f"Exception: {type(e).__name__}: {str(e)}", exc_info=True)


def get_user_friendly_error_message(error_code: str, *args, **kwargs) -> str:
    """
    Get a user-friendly error message for an error code.

    Args:
        error_code: Error code to get message for
        *args: Positional arguments to format the message with
        **kwargs: Keyword arguments to format the message with

    Returns:
        str: User-friendly error message
    """
    error_messages = {
        # General errors
        'GENERAL_ERROR': "An error occurred: {0}",
        'FILE_NOT_FOUND': "File not found: {0}",
        'OUTPUT_ERROR': "Cannot write output: {0}",

        # Configuration errors
        'CONFIG_INVALID': "Invalid configuration: {0}",
        'CONFIG_PARSE_ERROR': "Configuration error: {0}",
        'UNKNOWN_SCENARIO': "Unknown scenario: {0}",

        # Numerical errors
        'DOMAIN_VIOLATION': "Field outside its domain: {0}",
        'PRECONDITION_FAILED': "Precondition failed: {0}",
        'INTEGRATION_FAILED': "Time integration failed: {0}",
        'UNSUPPORTED_SCHEME': "Unsupported time-stepping scheme: {0}",
        'DIAGNOSTICS_ERROR': "Diagnostics error: {0}",
    }

    message = error_messages.get(error_code, "Unknown error: {0}")

    if args:
        message = message.format(*args)
    elif kwargs:
        message = message.format(**kwargs)

    return message
