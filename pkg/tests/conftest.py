"""
Test configuration for the axisymmetric Hall-MHD lab tests.

This module keeps lab log output quiet between tests and clears the per-grid
operator caches so tests never share solver state.
"""

import logging

import pytest

import operators


@pytest.fixture(autouse=True)
def quiet_logging():
    """Silence lab log output below WARNING for the duration of a test."""
    root = logging.getLogger()
    previous = root.level
    root.setLevel(logging.WARNING)
    yield
    root.setLevel(previous)


@pytest.fixture(autouse=True)
def reset_operator_caches():
    """Drop cached stream solvers and stencil coefficients between tests."""
    yield
    operators.stream_solver_for.cache_clear()
    operators._minus_coefficients.cache_clear()
