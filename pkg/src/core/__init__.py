"""
Core modules for the axisymmetric Hall-MHD lab.

This package contains the logging and error handling infrastructure shared by the
solver, diagnostics, bench and experiment modules.
"""

from .error_handling import (
    BenchError,
    BreakdownSignal,
    CalibrationError,
    CflFloorError,
    CheckpointError,
    ConfigurationError,
    FieldValueError,
    GridError,
    NonFiniteError,
    ParityError,
    SimulationError,
    handle_simulation_operations,
    safe_experiment,
    validate_grid_parameters,
)
from .logging_config import configure_logging, get_logger, log_error_context, log_run_metrics

__all__ = [
    # Error handling
    "BenchError",
    "BreakdownSignal",
    "CalibrationError",
    "CflFloorError",
    "CheckpointError",
    "ConfigurationError",
    "FieldValueError",
    "GridError",
    "NonFiniteError",
    "ParityError",
    "SimulationError",
    "handle_simulation_operations",
    "safe_experiment",
    "validate_grid_parameters",
    # Logging
    "configure_logging",
    "get_logger",
    "log_error_context",
    "log_run_metrics",
]
