"""
Error handling for the axisymmetric Hall-MHD lab.

This module defines the exception hierarchy shared by every lab module, the
operation decorator that times and logs top-level operations, and the batch helper
that turns a failing sweep row or bench sample into a recorded error instead of an
aborted batch.

Breakdown of a simulation is a measurement, not a crash: the ``BreakdownSignal``
subclasses are raised inside the stepping code and converted into termination
reasons by ``solver.run``.
"""

import functools
import numbers
import time
from typing import Any, Callable, Optional, Tuple

from .logging_config import get_logger, log_error_context


class SimulationError(Exception):
    """Base exception for lab errors."""

    pass


class ConfigurationError(SimulationError):
    """Exception raised when a configuration document or value is invalid."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        self.reason = message
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GridError(SimulationError):
    """Exception raised for invalid or mismatched grids."""

    pass


class ParityError(SimulationError):
    """Exception raised when an operator receives a field of the wrong parity."""

    pass


class FieldValueError(SimulationError):
    """Exception raised when a sampled or computed field holds a non-finite value."""

    def __init__(self, message: str, node: Optional[Tuple[int, int]] = None):
        self.node = node
        super().__init__(message)


class CheckpointError(SimulationError):
    """Exception raised when a checkpoint cannot be written or read back."""

    pass


class CalibrationError(ConfigurationError):
    """Exception raised when the initial swirl amplitude cannot be calibrated."""

    pass


class BenchError(SimulationError):
    """Exception raised for invalid lemma bench requests."""

    pass


class BreakdownSignal(SimulationError):
    """Base class for signals that end a run gracefully with a reason code."""

    reason = "breakdown"


class CflFloorError(BreakdownSignal):
    """Raised when the stable time step falls below the configured floor."""

    reason = "cfl_floor"

    def __init__(self, dt: float, dt_min: float):
        self.dt = dt
        self.dt_min = dt_min
        super().__init__(f"time step {dt:.3e} below floor {dt_min:.3e}")


class NonFiniteError(BreakdownSignal):
    """Raised when a stage produces a non-finite value."""

    reason = "nonfinite"

    def __init__(self, message: str, node: Optional[Tuple[int, int]] = None):
        self.node = node
        super().__init__(message)


def handle_simulation_operations(operation_name: str, component: str = "lab"):
    """
    Decorator for top-level lab operations with timing and logging.

    Lab errors are logged with context and re-raised unchanged; anything else is
    wrapped in ``SimulationError``.

    Args:
        operation_name: Name of the operation being performed
        component: Component name for logging context
    """

    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs) -> Any:
            logger = get_logger(func.__module__, component)
            start_time = time.time()

            logger.info(f"Starting {operation_name}")

            try:
                result = func(*args, **kwargs)
                duration = time.time() - start_time
                logger.info(f"Successfully completed {operation_name} in {duration:.2f}s")
                return result

            except SimulationError as e:
                context = {
                    "operation": operation_name,
                    "duration": time.time() - start_time,
                    "args_count": len(args),
                    "kwargs_keys": list(kwargs.keys()),
                }
                log_error_context(logger, e, operation_name, context)
                raise

            except OSError:
                # I/O errors keep their type so the CLI can map them to exit code 2
                logger.error(f"I/O failure in {operation_name}", exc_info=True)
                raise

            except Exception as e:
                context = {
                    "operation": operation_name,
                    "duration": time.time() - start_time,
                    "args_count": len(args),
                    "kwargs_keys": list(kwargs.keys()),
                }
                wrapped_error = SimulationError(f"Unexpected error in {operation_name}: {str(e)}")
                log_error_context(logger, wrapped_error, operation_name, context)
                raise wrapped_error from e

        return wrapper

    return decorator


def safe_experiment(operation: Callable, *args, **kwargs) -> Tuple[Any, Optional[Exception]]:
    """
    Execute one unit of a batch, capturing its failure.

    Args:
        operation: Function to execute
        *args: Arguments for the operation
        **kwargs: Keyword arguments for the operation

    Returns:
        Tuple of (result, None) on success or (None, error) on failure
    """
    logger = get_logger(__name__, "safe_experiment")

    try:
        return operation(*args, **kwargs), None
    except Exception as e:
        logger.warning(f"Batch unit {getattr(operation, '__name__', 'operation')} failed: {e.__class__.__name__}: {e}")
        return None, e


def validate_grid_parameters(n_r: Any, n_z: Any, r_max: Any, z_len: Any) -> None:
    """
    Validate grid construction parameters.

    Args:
        n_r: Number of radial cells
        n_z: Number of axial cells
        r_max: Radial extent
        z_len: Axial period

    Raises:
        GridError: If parameters are invalid
    """
    for name, value in (("n_r", n_r), ("n_z", n_z)):
        if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < 8:
            raise GridError(f"{name} must be an integer >= 8, got {value!r}")

    for name, value in (("r_max", r_max), ("z_len", z_len)):
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise GridError(f"{name} must be a real number, got {value!r}")
        if not (value > 0.0) or value == float("inf"):
            raise GridError(f"{name} must be positive and finite, got {value!r}")
