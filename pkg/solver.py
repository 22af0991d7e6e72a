"""
Time integration of the reduced axisymmetric Hall-MHD system.

The evolved state is (Gamma, Omega, H) with Gamma = r u_theta, Omega = omega_theta / r
and H = h_theta / r, all even in r:

    d_t Gamma = -b . grad Gamma
    d_t Omega = -b . grad Omega - mu0_inv d_z(H^2) + d_z(Gamma^2) / r^4
    d_t H     = -b . grad H + nu (Delta + (2/r) d_r) H + hall 2 H d_z H

with b recovered from r Omega by the stream-function solve at every stage. Time
stepping is the three-stage strong-stability-preserving Runge-Kutta scheme with
every term explicit.

Breakdown (CFL floor, non-finite values, norm cap, bootstrap violation) ends a run
gracefully with a reason code; it is the measurand of the sweep harness.
"""

import math
import struct
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

import diagnostics
from grid_fields import Grid, Parity, ScalarField, difference_r, difference_z, first_nonfinite
from operators import MeridianVelocity, curl_axisym, laplacian_plus, meridian_velocity
from src.core import (
    CalibrationError,
    CflFloorError,
    CheckpointError,
    ConfigurationError,
    FieldValueError,
    GridError,
    NonFiniteError,
    get_logger,
    handle_simulation_operations,
    log_run_metrics,
)

logger = get_logger(__name__, "solver")

# Stencil weight of the 5-D Laplacian in the diffusive CFL limit
C_LAP = 5.0

CALIBRATION_TOLERANCE = 1e-3

# Shu-Osher form of SSP-RK3: (weight of u^n, weight of previous stage, stage time offset)
SSPRK3_STAGES = ((0.0, 1.0, 0.0), (0.75, 0.25, 1.0), (1.0 / 3.0, 2.0 / 3.0, 0.5))

CHECKPOINT_MAGIC = b"AXHM"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<4sIII6d")

BUMP_KINDS = ("gaussian", "ring", "zero")


def _check_finite_number(name: str, value: float) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigurationError(f"{name} must be a finite number, got {value!r}")


@dataclass(frozen=True)
class PhysicalParams:
    """Coefficients of the reduced system; all equal to 1 is the normalized system."""

    nu: float = 1.0
    hall: float = 1.0
    mu0_inv: float = 1.0

    def __post_init__(self):
        for name in ("nu", "hall", "mu0_inv"):
            _check_finite_number(name, getattr(self, name))
        if self.nu < 0:
            raise ConfigurationError("nu must be ≥ 0")
        if self.hall < 0:
            raise ConfigurationError("hall must be ≥ 0")
        if not self.mu0_inv > 0:
            raise ConfigurationError("mu0_inv must be > 0")


@dataclass(frozen=True)
class BumpShape:
    """Named analytic profile, even in r, centered at z = center_z."""

    kind: str = "gaussian"
    width: float = 1.0
    center_z: Optional[float] = None
    ring_radius: float = 2.0

    def __post_init__(self):
        if self.kind not in BUMP_KINDS:
            raise ConfigurationError(f"shape must be one of {', '.join(BUMP_KINDS)}, got {self.kind!r}")
        _check_finite_number("width", self.width)
        if not self.width > 0:
            raise ConfigurationError("width must be > 0")
        _check_finite_number("ring_radius", self.ring_radius)
        if self.ring_radius < 0:
            raise ConfigurationError("ring_radius must be ≥ 0")
        if self.center_z is not None:
            _check_finite_number("center_z", self.center_z)

    def sample(self, grid: Grid) -> np.ndarray:
        r_mesh, z_mesh = grid.mesh()
        center = grid.z_center if self.center_z is None else self.center_z
        z_shift = z_mesh - center
        w2 = self.width**2
        if self.kind == "zero":
            return np.zeros(grid.shape)
        if self.kind == "ring":
            radius = self.ring_radius
            return np.exp(-((r_mesh - radius) ** 2 + z_shift**2) / w2) + np.exp(
                -((r_mesh + radius) ** 2 + z_shift**2) / w2
            )
        return np.exp(-(r_mesh**2 + z_shift**2) / w2)


@dataclass(frozen=True)
class InitialDataSpec:
    """Initial swirl size eps and bump profiles for Gamma, H and Omega."""

    eps: float = 1e-3
    swirl_shape: BumpShape = field(default_factory=BumpShape)
    h_shape: BumpShape = field(default_factory=BumpShape)
    omega_shape: BumpShape = field(default_factory=BumpShape)
    h_amp: float = 1.0
    omega_amp: float = 0.5

    def __post_init__(self):
        for name in ("eps", "h_amp", "omega_amp"):
            _check_finite_number(name, getattr(self, name))
        if self.eps < 0:
            raise ConfigurationError("eps must be ≥ 0")


@dataclass(frozen=True, eq=False)
class State:
    """Evolved triple (Gamma, Omega, H) with parameters and clock."""

    t: float
    gamma: ScalarField
    omega: ScalarField
    big_h: ScalarField
    params: PhysicalParams

    def __post_init__(self):
        for name in ("gamma", "omega", "big_h"):
            value = getattr(self, name)
            if value.parity is not Parity.EVEN:
                raise ConfigurationError(f"state field {name} must be even")
            if value.grid != self.gamma.grid:
                raise GridError("state fields must share one grid")

    @property
    def grid(self) -> Grid:
        return self.gamma.grid

    def arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.gamma.values, self.omega.values, self.big_h.values

    @classmethod
    def from_arrays(
        cls, grid: Grid, t: float, arrays: Sequence[np.ndarray], params: PhysicalParams
    ) -> "State":
        gamma, omega, big_h = (ScalarField(grid, values, Parity.EVEN) for values in arrays)
        return cls(t, gamma, omega, big_h, params)

    @classmethod
    def zeros(cls, grid: Grid, params: Optional[PhysicalParams] = None) -> "State":
        zero = ScalarField.zeros(grid, Parity.EVEN)
        return cls(0.0, zero, zero, zero, params or PhysicalParams())

    def swirl(self) -> ScalarField:
        """u_theta = Gamma / r."""
        return ScalarField(self.grid, self.gamma.values / self.grid.r_column, Parity.ODD)

    def azimuthal_vorticity(self) -> ScalarField:
        """omega_theta = r Omega."""
        return ScalarField(self.grid, self.grid.r_column * self.omega.values, Parity.ODD)

    def velocity(self) -> MeridianVelocity:
        return meridian_velocity(self.azimuthal_vorticity())


@dataclass(frozen=True, eq=False)
class Tendency:
    """Time derivatives of (Gamma, Omega, H)."""

    d_gamma: ScalarField
    d_omega: ScalarField
    d_big_h: ScalarField

    def arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.d_gamma.values, self.d_omega.values, self.d_big_h.values

    @classmethod
    def from_arrays(cls, grid: Grid, arrays: Sequence[np.ndarray]) -> "Tendency":
        return cls(*(ScalarField(grid, values, Parity.EVEN) for values in arrays))


Forcing = Callable[[float], Tendency]


class TerminationReason(str, Enum):
    COMPLETED = "completed"
    CFL_FLOOR = "cfl_floor"
    NONFINITE = "nonfinite"
    NORM_CAP = "norm_cap"
    BOOTSTRAP_VIOLATED = "bootstrap_violated"


@dataclass(frozen=True)
class RunControl:
    """Stepping controls of one run."""

    t_end: float = 1.0
    cfl_safety: float = 0.4
    dt_min: float = 1e-9
    record_every: int = 10
    norm_cap: float = 1e6
    checkpoint_every: int = 0
    checkpoint_path: Optional[str] = None
    stop_on_bootstrap: bool = True

    def __post_init__(self):
        for name in ("t_end", "cfl_safety", "dt_min", "norm_cap"):
            _check_finite_number(name, getattr(self, name))
        if self.t_end < 0:
            raise ConfigurationError("t_end must be ≥ 0")
        if not 0 < self.cfl_safety <= 1:
            raise ConfigurationError("cfl_safety must be in (0, 1]")
        if self.dt_min < 0:
            raise ConfigurationError("dt_min must be ≥ 0")
        if isinstance(self.record_every, bool) or not isinstance(self.record_every, int) or self.record_every < 1:
            raise ConfigurationError("record_every must be an integer ≥ 1")
        if not self.norm_cap > 0:
            raise ConfigurationError("norm_cap must be > 0")
        if (
            isinstance(self.checkpoint_every, bool)
            or not isinstance(self.checkpoint_every, int)
            or self.checkpoint_every < 0
        ):
            raise ConfigurationError("checkpoint_every must be an integer ≥ 0")
        if self.checkpoint_every > 0 and not self.checkpoint_path:
            raise ConfigurationError("checkpoint_every requires a checkpoint path")


@dataclass
class RunOutcome:
    """Final state, recorded history and termination of one run."""

    state: State
    history: List["diagnostics.DiagnosticsRecord"]
    reason: TerminationReason
    verdict: "diagnostics.BreakdownVerdict"
    events: List["diagnostics.BreakdownEvent"]
    steps: int

    def __iter__(self):
        return iter((self.state, self.history, self.reason))


def init_state(grid: Grid, spec: InitialDataSpec, params: PhysicalParams) -> State:
    """
    Build the initial state from bump profiles.

    The swirl u_theta = a r bump is calibrated so that the sup norm of
    (omega_r, omega_z) equals spec.eps; Gamma = r u_theta.

    Args:
        grid: Target grid
        spec: Initial data description
        params: Physical parameters

    Returns:
        State at t = 0

    Raises:
        CalibrationError: If eps > 0 and the swirl profile produces no vorticity
    """
    r = grid.r_column
    zero_velocity = MeridianVelocity.zeros(grid)

    if spec.eps == 0:
        gamma = np.zeros(grid.shape)
    else:
        profile = r * spec.swirl_shape.sample(grid)
        unit_swirl = ScalarField(grid, profile, Parity.ODD)
        unit_size = float(np.max(curl_axisym(unit_swirl, zero_velocity).meridian_magnitude()))
        if not unit_size > 0:
            raise CalibrationError(f"swirl shape {spec.swirl_shape.kind!r} cannot carry eps={spec.eps!r}")
        amplitude = spec.eps / unit_size
        gamma = amplitude * r * profile

        swirl = ScalarField(grid, gamma / r, Parity.ODD)
        measured = float(np.max(curl_axisym(swirl, zero_velocity).meridian_magnitude()))
        if abs(measured - spec.eps) > CALIBRATION_TOLERANCE * spec.eps:
            raise CalibrationError(f"calibrated swirl size {measured!r} misses eps={spec.eps!r}")
        logger.debug(f"Calibrated swirl amplitude a={amplitude:.6e} for eps={spec.eps:g}")

    omega = spec.omega_amp * spec.omega_shape.sample(grid)
    big_h = spec.h_amp * spec.h_shape.sample(grid)
    return State.from_arrays(grid, 0.0, (gamma, omega, big_h), params)


def _advect(b: MeridianVelocity, values: np.ndarray, grid: Grid) -> np.ndarray:
    """b . grad f for an even scalar f."""
    return b.u_r.values * difference_r(values, Parity.EVEN, grid) + b.u_z.values * difference_z(values, grid)


def _hall_term(big_h: np.ndarray, grid: Grid) -> np.ndarray:
    """2 H d_z H in the split form (2/3)(H D_z H + D_z(H^2)); conserves sum H^2 semi-discretely."""
    return (2.0 / 3.0) * (big_h * difference_z(big_h, grid) + difference_z(big_h * big_h, grid))


def _raise_nonfinite(grid: Grid, arrays: Sequence[np.ndarray], names: Sequence[str], where: str) -> None:
    for name, values in zip(names, arrays):
        node = first_nonfinite(values)
        if node is not None:
            i, j = node
            raise NonFiniteError(
                f"non-finite {name} in {where} at node (i={i}, j={j}), "
                f"r={grid.r_nodes[i]:.6g}, z={grid.z_nodes[j]:.6g}",
                node=node,
            )


def compute_rhs(state: State, forcing: Optional[Forcing] = None, b: Optional[MeridianVelocity] = None) -> Tendency:
    """
    Right-hand side of the reduced system.

    Args:
        state: Current state
        forcing: Optional analytic forcing evaluated at state.t (manufactured solutions)
        b: Meridian velocity of state, if already recovered

    Returns:
        Tendency (d_gamma, d_omega, d_big_h)

    Raises:
        NonFiniteError: If any intermediate is non-finite
    """
    grid = state.grid
    params = state.params
    r = grid.r_column
    gamma, omega, big_h = state.arrays()

    try:
        if b is None:
            b = state.velocity()
        diffusion = laplacian_plus(state.big_h).values if params.nu > 0 else np.zeros(grid.shape)
    except FieldValueError as e:
        raise NonFiniteError(f"non-finite intermediate in compute_rhs: {e}", node=e.node) from e

    with np.errstate(all="ignore"):
        d_gamma = -_advect(b, gamma, grid)
        d_omega = (
            -_advect(b, omega, grid) - params.mu0_inv * difference_z(big_h * big_h, grid)
        ) + difference_z(gamma * gamma, grid) / r**4
        d_big_h = -_advect(b, big_h, grid) + params.nu * diffusion + params.hall * _hall_term(big_h, grid)

        if forcing is not None:
            extra = forcing(state.t)
            d_gamma = d_gamma + extra.d_gamma.values
            d_omega = d_omega + extra.d_omega.values
            d_big_h = d_big_h + extra.d_big_h.values

    tendencies = (d_gamma, d_omega, d_big_h)
    _raise_nonfinite(grid, tendencies, ("d_gamma", "d_omega", "d_big_h"), "compute_rhs")
    return Tendency.from_arrays(grid, tendencies)


def cfl_dt(state: State, safety: float, dt_min: float = 0.0, b: Optional[MeridianVelocity] = None) -> float:
    """
    Stable explicit time step.

    dt = safety * min(h / (max|b| + eps), h_z / (2 hall max|H| + eps), h_min^2 / (4 nu C_lap))

    Args:
        state: Current state
        safety: Safety factor in (0, 1]
        dt_min: Floor below which the step counts as a breakdown
        b: Meridian velocity of state, if already recovered

    Returns:
        Time step

    Raises:
        CflFloorError: If dt < dt_min
    """
    if not 0 < safety <= 1:
        raise ConfigurationError("cfl_safety must be in (0, 1]")
    grid = state.grid
    params = state.params
    eps_mach = np.finfo(np.float64).eps

    if b is None:
        b = state.velocity()
    advective = grid.h_min / (b.max_speed() + eps_mach)
    hall = grid.h_z / (2.0 * params.hall * state.big_h.max_abs() + eps_mach)
    diffusive = grid.h_min**2 / (4.0 * params.nu * C_LAP) if params.nu > 0 else math.inf

    dt = safety * min(advective, hall, diffusive)
    if dt < dt_min:
        raise CflFloorError(dt, dt_min)
    return dt


def ssp_rk3(
    arrays: Tuple[np.ndarray, ...],
    t: float,
    dt: float,
    rhs: Callable[[float, Tuple[np.ndarray, ...]], Tuple[np.ndarray, ...]],
) -> Tuple[np.ndarray, ...]:
    """One SSP-RK3 step of y' = rhs(t, y) over a tuple of arrays."""
    stage = arrays
    for base_weight, stage_weight, time_offset in SSPRK3_STAGES:
        slopes = rhs(t + time_offset * dt, stage)
        stage = tuple(
            base_weight * base + stage_weight * (current + dt * slope)
            for base, current, slope in zip(arrays, stage, slopes)
        )
    return stage


def step(state: State, dt: float, forcing: Optional[Forcing] = None, b: Optional[MeridianVelocity] = None) -> State:
    """
    Advance the state by one SSP-RK3 step.

    Args:
        state: Current state
        dt: Time step (at most the cfl_dt output)
        forcing: Optional analytic forcing
        b: Meridian velocity of state, reused by the first stage

    Returns:
        State at t + dt

    Raises:
        NonFiniteError: If a stage produces a non-finite value
    """
    grid = state.grid
    params = state.params
    first_stage = {"b": b}

    def rhs(stage_time: float, arrays: Tuple[np.ndarray, ...]) -> Tuple[np.ndarray, ...]:
        _raise_nonfinite(grid, arrays, ("Gamma", "Omega", "H"), "stage")
        stage_state = State.from_arrays(grid, stage_time, arrays, params)
        velocity = first_stage.pop("b", None)
        return compute_rhs(stage_state, forcing, b=velocity).arrays()

    with np.errstate(all="ignore"):
        advanced = ssp_rk3(state.arrays(), state.t, dt, rhs)
    _raise_nonfinite(grid, advanced, ("Gamma", "Omega", "H"), "step")
    return State.from_arrays(grid, state.t + dt, advanced, params)


def checkpoint_save(state: State, path: str) -> None:
    """
    Write a state to a binary checkpoint.

    Layout: "AXHM", version, n_r, n_z (uint32 LE), r_max, z_len, t, nu, hall,
    mu0_inv (float64 LE), then Gamma, Omega, H as row-major float64 LE arrays.
    """
    grid = state.grid
    params = state.params
    header = _HEADER.pack(
        CHECKPOINT_MAGIC,
        CHECKPOINT_VERSION,
        grid.n_r,
        grid.n_z,
        grid.r_max,
        grid.z_len,
        state.t,
        params.nu,
        params.hall,
        params.mu0_inv,
    )
    with open(path, "wb") as handle:
        handle.write(header)
        for values in state.arrays():
            handle.write(np.ascontiguousarray(values, dtype="<f8").tobytes(order="C"))
    logger.debug(f"Checkpoint written to {path} at t={state.t!r}")


def checkpoint_load(path: str, expected_grid: Optional[Grid] = None) -> State:
    """
    Read a state written by checkpoint_save.

    Args:
        path: Checkpoint file
        expected_grid: If given, the stored grid must equal it

    Returns:
        The stored state, bit-exact

    Raises:
        CheckpointError: On bad magic, unsupported version, truncation, trailing
            bytes, invalid contents or grid mismatch
    """
    with open(path, "rb") as handle:
        data = handle.read()

    if len(data) < _HEADER.size:
        raise CheckpointError(f"truncated checkpoint header in {path}")
    magic, version, n_r, n_z, r_max, z_len, t, nu, hall, mu0_inv = _HEADER.unpack_from(data, 0)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(f"bad magic {magic!r} in {path}")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported version {version} in {path}")

    try:
        grid = Grid(n_r=n_r, n_z=n_z, r_max=r_max, z_len=z_len)
        params = PhysicalParams(nu=nu, hall=hall, mu0_inv=mu0_inv)
    except (GridError, ConfigurationError) as e:
        raise CheckpointError(f"invalid checkpoint header in {path}: {e}") from e

    count = n_r * n_z
    expected_size = _HEADER.size + 3 * count * 8
    if len(data) < expected_size:
        raise CheckpointError(f"truncated checkpoint {path}: {len(data)} of {expected_size} bytes")
    if len(data) > expected_size:
        raise CheckpointError(f"trailing bytes in checkpoint {path}")
    if expected_grid is not None and grid != expected_grid:
        raise CheckpointError(f"grid mismatch on resume: checkpoint has {grid.describe()}")

    arrays = [
        np.frombuffer(data, dtype="<f8", count=count, offset=_HEADER.size + k * count * 8)
        .reshape(grid.shape)
        .astype(np.float64)
        for k in range(3)
    ]
    try:
        return State.from_arrays(grid, t, arrays, params)
    except FieldValueError as e:
        raise CheckpointError(f"non-finite field in checkpoint {path}: {e}") from e


def _checkpoint_due(control: RunControl, steps: int) -> bool:
    return control.checkpoint_every > 0 and steps % control.checkpoint_every == 0


@handle_simulation_operations("simulation run", component="solver")
def run(
    grid: Grid,
    spec: InitialDataSpec,
    params: PhysicalParams,
    control: RunControl,
    forcing: Optional[Forcing] = None,
    initial_state: Optional[State] = None,
) -> RunOutcome:
    """
    Step a configuration to t_end or to its first breakdown signal.

    Diagnostics are recorded at t = 0, every record_every steps and at the final
    step. Breakdown signals (CFL floor, non-finite values, norm cap, bootstrap
    violation) end the run with a reason instead of an exception. The norm cap
    and bootstrap checks run on recorded steps, so t_proxy has the resolution
    of record_every.

    Args:
        grid: Grid
        spec: Initial data description (ignored when initial_state is given)
        params: Physical parameters
        control: Stepping controls
        forcing: Optional analytic forcing
        initial_state: State to resume from, for example a loaded checkpoint

    Returns:
        RunOutcome unpacking to (final state, history, reason)

    Raises:
        OSError: If a checkpoint cannot be written
    """
    start_time = time.time()
    if initial_state is not None:
        if initial_state.grid != grid:
            raise CheckpointError("grid mismatch on resume")
        state = initial_state
    else:
        state = init_state(grid, spec, params)

    history: List[diagnostics.DiagnosticsRecord] = []
    events: List[diagnostics.BreakdownEvent] = []
    termination = TerminationReason.COMPLETED
    steps = 0

    try:
        history.append(diagnostics.record(state, history, 0.0))
    except NonFiniteError:
        events.append(diagnostics.BreakdownEvent(0, diagnostics.BreakdownReason.NONFINITE))
        termination = TerminationReason.NONFINITE

    while termination is TerminationReason.COMPLETED and state.t < control.t_end:
        try:
            b = state.velocity()
            dt = cfl_dt(state, control.cfl_safety, control.dt_min, b=b)
            last = state.t + dt >= control.t_end
            if last:
                dt = control.t_end - state.t
            advanced = step(state, dt, forcing, b=b)
        except (NonFiniteError, FieldValueError):
            termination = TerminationReason.NONFINITE
        except CflFloorError as e:
            logger.info(f"CFL floor reached at t={state.t:.6g}: {e}")
            termination = TerminationReason.CFL_FLOOR
        if termination is not TerminationReason.COMPLETED:
            events.append(diagnostics.BreakdownEvent(len(history), diagnostics.BreakdownReason(termination.value)))
            break

        state = replace(advanced, t=control.t_end) if last else advanced
        steps += 1

        if _checkpoint_due(control, steps):
            checkpoint_save(state, control.checkpoint_path)

        if steps % control.record_every != 0 and not last:
            continue

        try:
            entry = diagnostics.record(state, history, dt)
        except NonFiniteError:
            events.append(diagnostics.BreakdownEvent(len(history), diagnostics.BreakdownReason.NONFINITE))
            termination = TerminationReason.NONFINITE
            break
        history.append(entry)
        index = len(history) - 1

        if entry.h3_u + entry.h3_h > control.norm_cap:
            events.append(diagnostics.BreakdownEvent(index, diagnostics.BreakdownReason.NORM_CAP))
            termination = TerminationReason.NORM_CAP
            break
        if entry.bootstrap_q > 1.0 and not any(
            event.reason is diagnostics.BreakdownReason.BOOTSTRAP_VIOLATED for event in events
        ):
            events.append(diagnostics.BreakdownEvent(index, diagnostics.BreakdownReason.BOOTSTRAP_VIOLATED))
            if control.stop_on_bootstrap:
                termination = TerminationReason.BOOTSTRAP_VIOLATED
                break
            logger.info(f"Bootstrap condition violated at t={entry.t:.6g}; continuing")

    verdict = diagnostics.breakdown_time(history, events)

    log_run_metrics(
        logger,
        "simulation run",
        time.time() - start_time,
        {"steps": steps, "t": f"{state.t:.6g}", "reason": termination.value, "records": len(history)},
        success=termination is TerminationReason.COMPLETED,
    )
    return RunOutcome(
        state=state, history=history, reason=termination, verdict=verdict, events=events, steps=steps
    )


def resume(path: str, grid: Grid, control: RunControl, forcing: Optional[Forcing] = None) -> RunOutcome:
    """Continue a run from a checkpoint written on the same grid."""
    state = checkpoint_load(path, expected_grid=grid)
    return run(grid, InitialDataSpec(), state.params, control, forcing=forcing, initial_state=state)
