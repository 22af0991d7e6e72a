"""
Cylindrical differential operators for axisymmetric fields.

All operators are second-order central differences on the cell-centered grid.
Radial stencils read the parity ghost row at the axis and the Dirichlet-0 row
beyond r_max; axial stencils wrap periodically.

The meridian velocity b = (u_r, u_z) is recovered from the azimuthal vorticity
through the stream function: (Delta - 1/r^2) psi = -omega_theta is solved with an
FFT in z and one banded radial solve per mode. The velocity stencils are chosen
so that the discrete divergence telescopes to zero.
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import List, Tuple, Union

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from grid_fields import (
    Grid,
    Parity,
    ScalarField,
    axis_weights,
    difference_r,
    difference_z,
    pad_r,
    second_difference_z,
)
from src.core import GridError, ParityError, SimulationError, get_logger

logger = get_logger(__name__, "operators")


class Axis(Enum):
    R = "r"
    Z = "z"


def _require_parity(field: ScalarField, parity: Parity, operation: str) -> None:
    if field.parity is not parity:
        raise ParityError(f"{operation} requires an {parity.value} field, got {field.parity.value}")


@dataclass(frozen=True)
class MeridianVelocity:
    """Meridian velocity b = u_r e_r + u_z e_z."""

    u_r: ScalarField
    u_z: ScalarField

    def __post_init__(self):
        _require_parity(self.u_r, Parity.ODD, "MeridianVelocity.u_r")
        _require_parity(self.u_z, Parity.EVEN, "MeridianVelocity.u_z")
        if self.u_r.grid != self.u_z.grid:
            raise GridError("u_r and u_z must share one grid")

    @classmethod
    def zeros(cls, grid: Grid) -> "MeridianVelocity":
        return cls(ScalarField.zeros(grid, Parity.ODD), ScalarField.zeros(grid, Parity.EVEN))

    @property
    def grid(self) -> Grid:
        return self.u_r.grid

    def max_speed(self) -> float:
        return float(np.max(np.hypot(self.u_r.values, self.u_z.values)))


@dataclass(frozen=True)
class VorticityTriple:
    """Cylindrical components of the vorticity of an axisymmetric flow."""

    omega_r: ScalarField
    omega_theta: ScalarField
    omega_z: ScalarField

    def meridian_magnitude(self) -> np.ndarray:
        """Pointwise |(omega_r, omega_z)|."""
        return np.hypot(self.omega_r.values, self.omega_z.values)


def partial_derivative(field: ScalarField, axis: Union[Axis, str]) -> ScalarField:
    """
    Central difference along r or z.

    Args:
        field: Field consistent with its parity tag
        axis: Axis.R (parity flips) or Axis.Z (parity preserved)

    Returns:
        Derivative field
    """
    axis = Axis(axis)
    if axis is Axis.R:
        return ScalarField(field.grid, difference_r(field.values, field.parity, field.grid), field.parity.flipped())
    return ScalarField(field.grid, difference_z(field.values, field.grid), field.parity)


def curl_axisym(u_theta: ScalarField, b: MeridianVelocity) -> VorticityTriple:
    """
    Vorticity of u = u_r e_r + u_theta e_theta + u_z e_z.

    omega_r = -d_z u_theta, omega_theta = d_z u_r - d_r u_z and
    omega_z = d_r u_theta + u_theta / r with cell-centered division.
    """
    _require_parity(u_theta, Parity.ODD, "curl_axisym")
    grid = u_theta.grid
    if b.grid != grid:
        raise GridError("swirl and meridian velocity must share one grid")

    omega_r = -difference_z(u_theta.values, grid)
    omega_theta = difference_z(b.u_r.values, grid) - _axial_velocity_difference_r(b.u_z.values, grid)
    omega_z = difference_r(u_theta.values, Parity.ODD, grid) + u_theta.values / grid.r_column

    return VorticityTriple(
        ScalarField(grid, omega_r, Parity.ODD),
        ScalarField(grid, omega_theta, Parity.ODD),
        ScalarField(grid, omega_z, Parity.EVEN),
    )


def _axial_velocity_difference_r(values: np.ndarray, grid: Grid) -> np.ndarray:
    """
    D_r of the even u_z with the wall ghost from quadratic extrapolation.

    u_z carries no condition at r_max, so the last row reduces to the one-sided
    second-order difference (3 f_{n-1} - 4 f_{n-2} + f_{n-3}) / (2 h_r).
    """
    padded = pad_r(values, Parity.EVEN)
    padded[-1] = 3.0 * values[-1] - 3.0 * values[-2] + values[-3]
    return (padded[2:] - padded[:-2]) / (2.0 * grid.h_r)


def _radial_flux_difference(values: np.ndarray, grid: Grid) -> np.ndarray:
    """(1/r) D_r(r f) for an odd f, with the even ghost of r f."""
    weighted = grid.r_column * values
    return difference_r(weighted, Parity.EVEN, grid) / grid.r_column


def discrete_divergence(b: MeridianVelocity) -> ScalarField:
    """Pointwise d_r u_r + u_r / r + d_z u_z, discretized as (1/r) D_r(r u_r) + D_z u_z."""
    grid = b.grid
    divergence = _radial_flux_difference(b.u_r.values, grid) + difference_z(b.u_z.values, grid)
    return ScalarField(grid, divergence, Parity.EVEN)


@lru_cache(maxsize=16)
def _minus_coefficients(grid: Grid) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tridiagonal radial coefficients (lower, diagonal, upper) of Delta - 1/r^2.

    Flux form with face radii r_{i +/- 1/2} and cell weights V_i; the face at the
    axis has zero radius, so the axis row never reads its ghost.
    """
    h = grid.h_r
    r = grid.r_nodes
    r_minus = r - 0.5 * h
    r_plus = r + 0.5 * h
    weights = axis_weights(grid)

    lower = r_minus / (weights * h * h)
    upper = r_plus / (weights * h * h)
    diagonal = -(r_minus + r_plus) / (weights * h * h) - 1.0 / (weights * r)
    for coefficients in (lower, diagonal, upper):
        coefficients.setflags(write=False)
    return lower, diagonal, upper


def _apply_radial_minus(values: np.ndarray, grid: Grid) -> np.ndarray:
    lower, diagonal, upper = _minus_coefficients(grid)
    result = diagonal[:, np.newaxis] * values
    result[1:] += lower[1:, np.newaxis] * values[:-1]
    result[:-1] += upper[:-1, np.newaxis] * values[1:]
    return result


def laplacian_minus(field: ScalarField) -> ScalarField:
    """
    Azimuthal vector Laplacian (Delta - 1/r^2) of an odd component.

    Exact on f = r and f = r^3 away from r_max and second order up to the axis.

    Raises:
        ParityError: If the field is even
    """
    _require_parity(field, Parity.ODD, "laplacian_minus")
    grid = field.grid
    result = _apply_radial_minus(field.values, grid) + second_difference_z(field.values, grid)
    return ScalarField(grid, result, Parity.ODD)


def _radial_second_and_first(values: np.ndarray, grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    padded = pad_r(values, Parity.EVEN)
    h = grid.h_r
    second = (padded[2:] - 2.0 * padded[1:-1] + padded[:-2]) / (h * h)
    first = (padded[2:] - padded[:-2]) / (2.0 * h)
    return second, first


def laplacian_plus(field: ScalarField) -> ScalarField:
    """
    (Delta + (2/r) d_r) of an even field, i.e. the 5-D radial Laplacian
    d_r^2 + (3/r) d_r + d_z^2.

    Raises:
        ParityError: If the field is odd
    """
    _require_parity(field, Parity.EVEN, "laplacian_plus")
    grid = field.grid
    second, first = _radial_second_and_first(field.values, grid)
    result = second + 3.0 * first / grid.r_column + second_difference_z(field.values, grid)
    return ScalarField(grid, result, Parity.EVEN)


def laplacian_scalar(field: ScalarField) -> ScalarField:
    """3-D Laplacian d_r^2 + (1/r) d_r + d_z^2 of an even scalar."""
    _require_parity(field, Parity.EVEN, "laplacian_scalar")
    grid = field.grid
    second, first = _radial_second_and_first(field.values, grid)
    result = second + first / grid.r_column + second_difference_z(field.values, grid)
    return ScalarField(grid, result, Parity.EVEN)


def hessian_magnitude(field: ScalarField) -> ScalarField:
    """Frobenius norm of the Cartesian Hessian of an even axisymmetric scalar."""
    _require_parity(field, Parity.EVEN, "hessian_magnitude")
    grid = field.grid
    f_rr, f_r = _radial_second_and_first(field.values, grid)
    f_zz = second_difference_z(field.values, grid)
    f_rz = difference_z(f_r, grid)
    hoop = f_r / grid.r_column
    magnitude = np.sqrt(f_rr**2 + 2.0 * f_rz**2 + f_zz**2 + hoop**2)
    return ScalarField(grid, magnitude, Parity.EVEN)


class StreamSolver:
    """Direct solver for (Delta - 1/r^2) psi = -omega on one grid.

    Holds the banded radial matrix of every z-mode; the z-symbol is that of the
    compact second difference, so the discrete residual vanishes to rounding.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        lower, diagonal, upper = _minus_coefficients(grid)
        modes = np.arange(grid.n_z // 2 + 1)
        self.mode_symbols = (4.0 / grid.h_z**2) * np.sin(np.pi * modes / grid.n_z) ** 2

        self._banded: List[np.ndarray] = []
        for symbol in self.mode_symbols:
            banded = np.zeros((3, grid.n_r))
            banded[0, 1:] = upper[:-1]
            banded[1] = diagonal - symbol
            banded[2, :-1] = lower[1:]
            self._banded.append(banded)

    def solve(self, omega_values: np.ndarray) -> np.ndarray:
        rhs_hat = np.fft.rfft(-omega_values, axis=1)
        psi_hat = np.empty_like(rhs_hat)
        for mode, banded in enumerate(self._banded):
            column = rhs_hat[:, mode]
            stacked = np.column_stack((column.real, column.imag))
            try:
                solution = solve_banded((1, 1), banded, stacked, check_finite=False)
            except LinAlgError as e:
                raise SimulationError(f"singular radial system for z-mode {mode}") from e
            psi_hat[:, mode] = solution[:, 0] + 1j * solution[:, 1]
        return np.fft.irfft(psi_hat, n=self.grid.n_z, axis=1)


@lru_cache(maxsize=8)
def stream_solver_for(grid: Grid) -> StreamSolver:
    logger.debug(f"Building stream-function solver for {grid.describe()}")
    return StreamSolver(grid)


def solve_streamfunction(omega_theta: ScalarField) -> ScalarField:
    """
    Recover the azimuthal stream function from the azimuthal vorticity.

    Solves (Delta - 1/r^2) psi = -omega_theta with psi odd, Dirichlet beyond
    r_max and periodic in z.

    Args:
        omega_theta: Odd vorticity component

    Returns:
        Odd stream function psi_theta

    Raises:
        ParityError: If omega_theta is even
    """
    _require_parity(omega_theta, Parity.ODD, "solve_streamfunction")
    psi = stream_solver_for(omega_theta.grid).solve(omega_theta.values)
    return ScalarField(omega_theta.grid, psi, Parity.ODD)


def velocity_from_stream(psi_theta: ScalarField) -> MeridianVelocity:
    """
    Meridian velocity b = curl(psi_theta e_theta).

    u_r = -D_z psi and u_z = (1/r) D_r(r psi), which makes discrete_divergence
    vanish identically.
    """
    _require_parity(psi_theta, Parity.ODD, "velocity_from_stream")
    grid = psi_theta.grid
    u_r = -difference_z(psi_theta.values, grid)
    u_z = _radial_flux_difference(psi_theta.values, grid)
    return MeridianVelocity(ScalarField(grid, u_r, Parity.ODD), ScalarField(grid, u_z, Parity.EVEN))


def meridian_velocity(omega_theta: ScalarField) -> MeridianVelocity:
    """Biot-Savart recovery: velocity_from_stream(solve_streamfunction(omega_theta))."""
    return velocity_from_stream(solve_streamfunction(omega_theta))


def meridian_gradient_magnitude(b: MeridianVelocity) -> ScalarField:
    """Pointwise Frobenius norm of grad b, including the hoop term u_r / r."""
    grid = b.grid
    u_r = b.u_r.values
    u_z = b.u_z.values
    squared = (
        difference_r(u_r, Parity.ODD, grid) ** 2
        + difference_z(u_r, grid) ** 2
        + _axial_velocity_difference_r(u_z, grid) ** 2
        + difference_z(u_z, grid) ** 2
        + (u_r / grid.r_column) ** 2
    )
    return ScalarField(grid, np.sqrt(squared), Parity.EVEN)


def velocity_gradient_magnitude(u_theta: ScalarField, b: MeridianVelocity) -> ScalarField:
    """Pointwise Frobenius norm of grad u for the full axisymmetric velocity."""
    _require_parity(u_theta, Parity.ODD, "velocity_gradient_magnitude")
    grid = u_theta.grid
    meridian = meridian_gradient_magnitude(b).values
    swirl_squared = (
        difference_r(u_theta.values, Parity.ODD, grid) ** 2
        + difference_z(u_theta.values, grid) ** 2
        + (u_theta.values / grid.r_column) ** 2
    )
    return ScalarField(grid, np.sqrt(meridian**2 + swirl_squared), Parity.EVEN)
