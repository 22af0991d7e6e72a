"""
Manufactured solutions for the convergence study.

Each case supplies exact fields (Gamma*, Omega*, H*) in closed form and the
analytic forcing that makes them solve the reduced system:

- ``heat_kernel``: the 5-D Gaussian kernel of d_t H = nu (Delta + (2/r) d_r) H with
  Gamma* = Omega* = 0 and hall = 0; the only forcing cancels mu0_inv d_z(H^2).
- ``coupled``: Gaussian bumps in all three variables with time-dependent
  amplitudes, exercising transport, Lorentz, swirl, diffusion and Hall terms.
- ``zero``: the trivial solution with no forcing.

With phi = exp(-rho^2), rho^2 = r^2 + (z - z_c)^2, the coupled case uses
Gamma* = a(t) r^2 phi, psi* = c(t) r phi (so Omega* = c (10 - 4 rho^2) phi) and
H* = k(t) phi.
"""

import math
from abc import ABC, abstractmethod
from typing import Optional, Tuple

import numpy as np

from grid_fields import Grid, Parity, ScalarField
from solver import Forcing, PhysicalParams, State, Tendency
from src.core import ConfigurationError, get_logger

logger = get_logger(__name__, "manufactured")

Triple = Tuple[np.ndarray, np.ndarray, np.ndarray]

MANUFACTURED_CASES = ("heat_kernel", "coupled", "zero")

HEAT_KERNEL_T0 = 0.25


def _coordinates(grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    r_mesh, z_mesh = grid.mesh()
    return r_mesh, z_mesh - grid.z_center


class ManufacturedSolution(ABC):
    """Exact solution of the forced reduced system on the default cylinder."""

    name = "manufactured"

    def __init__(self, params: PhysicalParams):
        self.params = params

    @abstractmethod
    def exact_fields(self, r: np.ndarray, z: np.ndarray, t: float) -> Triple:
        """(Gamma*, Omega*, H*) at time t; z is measured from the domain center."""

    @abstractmethod
    def forcing_fields(self, r: np.ndarray, z: np.ndarray, t: float) -> Optional[Triple]:
        """Forcing (F_Gamma, F_Omega, F_H) at time t, or None when unforced."""

    def state_at(self, grid: Grid, t: float) -> State:
        r, z = _coordinates(grid)
        return State.from_arrays(grid, t, self.exact_fields(r, z, t), self.params)

    def forcing_for(self, grid: Grid) -> Optional[Forcing]:
        r, z = _coordinates(grid)
        if self.forcing_fields(r, z, 0.0) is None:
            return None

        def forcing(t: float) -> Tendency:
            return Tendency.from_arrays(grid, self.forcing_fields(r, z, t))

        return forcing

    def error(self, state: State) -> float:
        """Largest sup-norm deviation of (Gamma, Omega, H) from the exact fields at state.t."""
        r, z = _coordinates(state.grid)
        exact = self.exact_fields(r, z, state.t)
        return max(float(np.max(np.abs(computed - reference))) for computed, reference in zip(state.arrays(), exact))


class ZeroSolution(ManufacturedSolution):
    name = "zero"

    def exact_fields(self, r, z, t):
        zero = np.zeros_like(r)
        return zero, zero.copy(), zero.copy()

    def forcing_fields(self, r, z, t):
        return None


class HeatKernelSolution(ManufacturedSolution):
    """5-D Gaussian kernel (t0 / (t0 + nu t))^{5/2} exp(-rho^2 / (4 (t0 + nu t)))."""

    name = "heat_kernel"

    def __init__(self, params: PhysicalParams):
        if params.hall != 0:
            params = PhysicalParams(nu=params.nu, hall=0.0, mu0_inv=params.mu0_inv)
        super().__init__(params)

    def _kernel(self, r, z, t):
        spread = HEAT_KERNEL_T0 + self.params.nu * t
        amplitude = (HEAT_KERNEL_T0 / spread) ** 2.5
        return amplitude, spread, amplitude * np.exp(-(r**2 + z**2) / (4.0 * spread))

    def exact_fields(self, r, z, t):
        _, _, big_h = self._kernel(r, z, t)
        return np.zeros_like(r), np.zeros_like(r), big_h

    def forcing_fields(self, r, z, t):
        _, spread, big_h = self._kernel(r, z, t)
        # d_z(H^2) = -(z / spread) H^2
        d_omega = self.params.mu0_inv * (-(z / spread) * big_h**2)
        return np.zeros_like(r), d_omega, np.zeros_like(r)


class CoupledBumpSolution(ManufacturedSolution):
    """Gaussian bumps in Gamma, psi and H with amplitudes a(t), c(t), k(t)."""

    name = "coupled"

    def __init__(self, params: PhysicalParams, swirl_amp: float = 0.5, stream_amp: float = 0.5, h_amp: float = 1.0):
        super().__init__(params)
        self.swirl_amp = swirl_amp
        self.stream_amp = stream_amp
        self.h_amp = h_amp

    def _amplitudes(self, t: float) -> Tuple[float, float, float, float, float, float]:
        a = self.swirl_amp * (1.0 + t)
        a_dot = self.swirl_amp
        c = self.stream_amp * math.cos(t)
        c_dot = -self.stream_amp * math.sin(t)
        k = self.h_amp * math.exp(-t)
        k_dot = -k
        return a, a_dot, c, c_dot, k, k_dot

    def exact_fields(self, r, z, t):
        a, _, c, _, k, _ = self._amplitudes(t)
        rho2 = r**2 + z**2
        phi = np.exp(-rho2)
        return a * r**2 * phi, c * (10.0 - 4.0 * rho2) * phi, k * phi

    def forcing_fields(self, r, z, t):
        a, a_dot, c, c_dot, k, k_dot = self._amplitudes(t)
        nu, hall, mu0_inv = self.params.nu, self.params.hall, self.params.mu0_inv
        rho2 = r**2 + z**2
        phi = np.exp(-rho2)
        phi2 = phi * phi

        u_r = 2.0 * c * r * z * phi
        u_z = c * (2.0 - 2.0 * r**2) * phi

        gamma_r = a * (2.0 * r - 2.0 * r**3) * phi
        gamma_z = -2.0 * a * z * r**2 * phi
        omega_r = c * r * phi * (8.0 * rho2 - 28.0)
        omega_z = c * z * phi * (8.0 * rho2 - 28.0)
        h_r = -2.0 * k * r * phi
        h_z = -2.0 * k * z * phi

        dz_h_squared = -4.0 * z * k * k * phi2
        dz_gamma_squared_over_r4 = -4.0 * a * a * z * phi2
        lap5_h = k * (4.0 * rho2 - 10.0) * phi

        f_gamma = a_dot * r**2 * phi + u_r * gamma_r + u_z * gamma_z
        f_omega = (
            c_dot * (10.0 - 4.0 * rho2) * phi
            + u_r * omega_r
            + u_z * omega_z
            + mu0_inv * dz_h_squared
            - dz_gamma_squared_over_r4
        )
        f_big_h = k_dot * phi + u_r * h_r + u_z * h_z - nu * lap5_h - hall * dz_h_squared
        return f_gamma, f_omega, f_big_h

    def exact_velocity(self, grid: Grid, t: float) -> Tuple[ScalarField, ScalarField]:
        """Analytic (u_r, u_z) of psi* on the grid."""
        r, z = _coordinates(grid)
        _, _, c, _, _, _ = self._amplitudes(t)
        phi = np.exp(-(r**2 + z**2))
        u_r = ScalarField(grid, 2.0 * c * r * z * phi, Parity.ODD)
        u_z = ScalarField(grid, c * (2.0 - 2.0 * r**2) * phi, Parity.EVEN)
        return u_r, u_z


def manufactured_solution(case: str, params: Optional[PhysicalParams] = None) -> ManufacturedSolution:
    """
    Look up a manufactured solution by name.

    Args:
        case: One of heat_kernel, coupled, zero
        params: Physical parameters (hall is forced to 0 for heat_kernel)

    Returns:
        ManufacturedSolution

    Raises:
        ConfigurationError: If the case is unknown
    """
    params = params or PhysicalParams()
    if case == "heat_kernel":
        return HeatKernelSolution(params)
    if case == "coupled":
        return CoupledBumpSolution(params)
    if case == "zero":
        return ZeroSolution(params)
    raise ConfigurationError(f"case must be one of {', '.join(MANUFACTURED_CASES)}, got {case!r}")
