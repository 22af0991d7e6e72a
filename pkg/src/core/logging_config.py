"""
Structured logging configuration for the axisymmetric Hall-MHD lab.

Every module logs through a component-tagged adapter so that solver, diagnostics,
bench and experiment output can be told apart in one stream. Data products (CSV,
checkpoints) never pass through logging.
"""

import logging
import logging.handlers
import os
from datetime import datetime, timezone
from typing import Any, Dict, Optional

SERVICE_NAME = "axisym-hall-lab"


class LabFormatter(logging.Formatter):
    """Formatter producing one structured line per record."""

    def __init__(self, enable_structured: bool = True):
        """Initialize the formatter.

        Args:
            enable_structured: Whether to emit the full structured format
        """
        self.enable_structured = enable_structured
        super().__init__()

    def format(self, record: logging.LogRecord) -> str:
        """Format log record with service, component and location context."""
        timestamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%f")

        component = getattr(record, "component", None)
        if not component:
            logger_parts = record.name.split(".")
            component = logger_parts[-1] if len(logger_parts) > 1 else record.name or "lab"

        location = f"{record.filename}:{record.funcName}:{record.lineno}"
        message = record.getMessage()
        if record.exc_info and self.enable_structured:
            message = f"{message}\n{self.formatException(record.exc_info)}"

        if self.enable_structured:
            return f"{timestamp} - {SERVICE_NAME} - {component} - {record.levelname} - {location} - {message}"
        return f"[{record.levelname}] {component}:{record.funcName}:{record.lineno} - {message}"


def get_logger(name: str, component: Optional[str] = None) -> logging.Logger:
    """
    Get a logger for a lab module.

    Args:
        name: Logger name (typically __name__)
        component: Optional component name for context

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)

    if component:
        logger = logging.LoggerAdapter(logger, {"component": component})

    return logger


def configure_logging(
    log_level: str = "INFO",
    enable_console: bool = True,
    enable_file: bool = False,
    enable_structured: bool = True,
    log_dir: str = "logs",
    log_file: str = "axisym-hall-lab.log",
) -> None:
    """
    Configure root logging for the lab.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        enable_console: Enable console logging
        enable_file: Enable file logging with rotation
        enable_structured: Enable structured logging format
        log_dir: Directory for log files
        log_file: Log file name
    """
    numeric_level = getattr(logging, log_level.upper(), logging.INFO)

    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    root_logger.setLevel(numeric_level)

    formatter = LabFormatter(enable_structured=enable_structured)

    if enable_console:
        console_handler = logging.StreamHandler()
        console_handler.setLevel(numeric_level)
        console_handler.setFormatter(formatter)
        root_logger.addHandler(console_handler)

    if enable_file:
        os.makedirs(log_dir, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            os.path.join(log_dir, log_file), maxBytes=10 * 1024 * 1024, backupCount=5  # 10MB
        )
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    # numpy floating-point warnings go through the warnings module
    logging.captureWarnings(True)

    logger = get_logger(__name__, "logging_config")
    logger.info(
        f"Logging configured: level={log_level}, console={enable_console}, "
        f"file={enable_file}, structured={enable_structured}"
    )


def log_error_context(
    logger: logging.Logger, error: Exception, operation: str, context: Optional[Dict[str, Any]] = None
) -> None:
    """
    Log error with context information.

    Args:
        logger: Logger instance
        error: Exception that occurred
        operation: Operation being performed when error occurred
        context: Additional context information
    """
    context = context or {}

    logger.error(
        f"Error in {operation}: {error.__class__.__name__}: {str(error)}",
        extra={"operation": operation, "error_type": error.__class__.__name__, "context": context},
        exc_info=True,
    )


def log_run_metrics(
    logger: logging.Logger, operation: str, processing_time: float, run_info: Dict[str, Any], success: bool = True
) -> None:
    """
    Log a one-line summary of a finished run, sweep, bench or study.

    Args:
        logger: Logger instance
        operation: Operation name
        processing_time: Wall time in seconds
        run_info: Summary values (steps, reason, final time, ...)
        success: Whether the operation finished normally
    """
    status = "success" if success else "failed"
    details = ", ".join(f"{key}={value}" for key, value in run_info.items())

    logger.info(
        f"Lab operation {status}: {operation} completed in {processing_time:.3f}s ({details})",
        extra={
            "operation": operation,
            "processing_time": processing_time,
            "run_info": run_info,
            "success": success,
        },
    )
