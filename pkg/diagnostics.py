"""
Diagnostics engine for the axisymmetric Hall-MHD lab.

One DiagnosticsRecord per recorded step holds every tracked norm of the a-priori
chain, the bootstrap quantity q(t) = t * sup_{s<=t} ||(omega_r, omega_z)(s)||_inf
and the running time integrals (trapezoid rule over the recorded history).

The CSV layout is part of the contract: columns follow the DiagnosticsRecord field
order, floats are written as shortest round-trip decimals and lines end with "\n".
"""

import csv
import math
from dataclasses import astuple, dataclass, fields
from enum import Enum
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence

import numpy as np

from grid_fields import (
    Parity,
    ScalarField,
    gradient_magnitude,
    lp_norm,
    lp_norm_of_values,
    mixed_derivative,
    sobolev_norm,
)
from operators import (
    Axis,
    MeridianVelocity,
    curl_axisym,
    meridian_gradient_magnitude,
    partial_derivative,
    velocity_gradient_magnitude,
)
from src.core import FieldValueError, NonFiniteError, SimulationError, get_logger

if TYPE_CHECKING:
    from solver import State

logger = get_logger(__name__, "diagnostics")

BOOTSTRAP_THRESHOLD = 1.0


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One time-stamped row of tracked norms; column order is the CSV header."""

    t: float
    dt: float
    linf_omega_rz: float
    linf_omega_theta: float
    l2_H: float
    l6_H: float
    linf_H: float
    l2_Omega: float
    l6_Omega: float
    l2_grad_H: float
    l2_grad_dz_H: float
    l1linf_dz_H_running: float
    l2_h_theta: float
    linf_h_theta: float
    l2_grad_b: float
    l6_grad_b: float
    l2_energy: float
    h3_u: float
    h3_h: float
    bootstrap_q: float
    linf_ur_over_r: float
    linf_utheta_over_r: float
    l2_J: float
    l6_J: float
    l4_H: float
    linf_curl_u: float
    l1linf_curl_u_running: float
    linf_dz_H: float
    linf_grad_u: float
    l1linf_grad_u_running: float
    swirl_growth_bound: float
    l2l2_grad_H_running: float
    l2_grad_h_theta: float
    l2l2_grad_h_theta_running: float
    l2l2_h_theta_over_r_running: float
    linf_grad_h: float
    l2linf_grad_h_running: float
    l3_hess_h: float
    l2l3_hess_h_running: float

    @classmethod
    def column_names(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def zeros(cls, t: float = 0.0) -> "DiagnosticsRecord":
        values = dict.fromkeys(cls.column_names(), 0.0)
        values["t"] = t
        return cls(**values)


# (running column, instantaneous column, power of the integrand)
RUNNING_INTEGRALS = (
    ("l1linf_dz_H_running", "linf_dz_H", 1),
    ("l1linf_curl_u_running", "linf_curl_u", 1),
    ("l1linf_grad_u_running", "linf_grad_u", 1),
    ("l2l2_grad_H_running", "l2_grad_H", 2),
    ("l2l2_grad_h_theta_running", "l2_grad_h_theta", 2),
    ("l2l2_h_theta_over_r_running", "l2_H", 2),
    ("l2linf_grad_h_running", "linf_grad_h", 2),
    ("l2l3_hess_h_running", "l3_hess_h", 2),
)


class BreakdownReason(str, Enum):
    """Reason stream entries; declaration order is the precedence within one step."""

    NONFINITE = "nonfinite"
    CFL_FLOOR = "cfl_floor"
    NORM_CAP = "norm_cap"
    BOOTSTRAP_VIOLATED = "bootstrap_violated"
    NONE = "none"


_PRECEDENCE = {reason: rank for rank, reason in enumerate(BreakdownReason)}


@dataclass(frozen=True)
class BreakdownEvent:
    """One breakdown signal; index is the record index the event precedes."""

    index: int
    reason: BreakdownReason


@dataclass(frozen=True)
class BreakdownVerdict:
    t_proxy: float
    reason: BreakdownReason


def _instantaneous(state: "State", b: Optional[MeridianVelocity]) -> Dict[str, float]:
    grid = state.grid
    r = grid.r_column
    big_h = state.big_h
    omega = state.omega

    u_theta = state.swirl()
    if b is None:
        b = state.velocity()
    vorticity = curl_axisym(u_theta, b)
    omega_theta = state.azimuthal_vorticity()
    h_theta = ScalarField(grid, r * big_h.values, Parity.ODD)

    linf_omega_rz = float(np.max(vorticity.meridian_magnitude()))
    linf_omega_theta = omega_theta.max_abs()

    dz_big_h = partial_derivative(big_h, Axis.Z)
    grad_b = meridian_gradient_magnitude(b)
    current = ScalarField(grid, vorticity.omega_r.values / r, Parity.EVEN)

    h_theta_gradient = gradient_magnitude(h_theta).values
    h_theta_hessian = np.sqrt(
        mixed_derivative(h_theta, 2, 0).values ** 2
        + 2.0 * mixed_derivative(h_theta, 1, 1).values ** 2
        + mixed_derivative(h_theta, 0, 2).values ** 2
    )

    velocity_components = [b.u_r, u_theta, b.u_z]
    return {
        "linf_omega_rz": linf_omega_rz,
        "linf_omega_theta": linf_omega_theta,
        "l2_H": lp_norm(big_h, 2),
        "l6_H": lp_norm(big_h, 6),
        "linf_H": lp_norm(big_h, math.inf),
        "l2_Omega": lp_norm(omega, 2),
        "l6_Omega": lp_norm(omega, 6),
        "l2_grad_H": lp_norm(gradient_magnitude(big_h), 2),
        "l2_grad_dz_H": lp_norm(gradient_magnitude(dz_big_h), 2),
        "l2_h_theta": lp_norm(h_theta, 2),
        "linf_h_theta": lp_norm(h_theta, math.inf),
        "l2_grad_b": lp_norm(grad_b, 2),
        "l6_grad_b": lp_norm(grad_b, 6),
        "l2_energy": sum(lp_norm(component, 2) ** 2 for component in velocity_components + [h_theta]),
        "h3_u": sobolev_norm(velocity_components, 3),
        "h3_h": sobolev_norm([h_theta], 3),
        "linf_ur_over_r": float(np.max(np.abs(b.u_r.values / r))),
        "linf_utheta_over_r": float(np.max(np.abs(u_theta.values / r))),
        "l2_J": lp_norm(current, 2),
        "l6_J": lp_norm(current, 6),
        "l4_H": lp_norm(big_h, 4),
        "linf_curl_u": linf_omega_rz + linf_omega_theta,
        "linf_dz_H": dz_big_h.max_abs(),
        "linf_grad_u": velocity_gradient_magnitude(u_theta, b).max_abs(),
        "l2_grad_h_theta": lp_norm_of_values(h_theta_gradient, grid, 2),
        "linf_grad_h": float(np.max(np.sqrt(h_theta_gradient**2 + big_h.values**2))),
        "l3_hess_h": lp_norm_of_values(h_theta_hessian, grid, 3),
    }


def record(
    state: "State",
    history: Sequence[DiagnosticsRecord],
    dt: float = 0.0,
    b: Optional[MeridianVelocity] = None,
) -> DiagnosticsRecord:
    """
    Compute the diagnostics row of a state.

    Args:
        state: Current state
        history: Prior records of the same run, oldest first
        dt: Step size that produced the state (0 for the initial record)
        b: Meridian velocity of the state, if already recovered

    Returns:
        Fully populated record; running integrals extend the last record of history
        by the trapezoid rule

    Raises:
        NonFiniteError: If any diagnostic is non-finite
    """
    try:
        with np.errstate(all="ignore"):
            values = _instantaneous(state, b)
    except FieldValueError as e:
        raise NonFiniteError(f"non-finite diagnostic at t={state.t!r}: {e}", node=e.node) from e

    values["t"] = state.t
    values["dt"] = dt

    previous = history[-1] if history else None
    for running, integrand, power in RUNNING_INTEGRALS:
        if previous is None:
            values[running] = 0.0
            continue
        span = state.t - previous.t
        values[running] = getattr(previous, running) + 0.5 * span * (
            getattr(previous, integrand) ** power + values[integrand] ** power
        )

    running_sup = max([entry.linf_omega_rz for entry in history] + [values["linf_omega_rz"]])
    values["bootstrap_q"] = state.t * running_sup

    initial_size = history[0].linf_omega_rz if history else values["linf_omega_rz"]
    values["swirl_growth_bound"] = initial_size * math.exp(values["l1linf_grad_u_running"])

    for name, value in values.items():
        if not math.isfinite(value):
            raise NonFiniteError(f"non-finite diagnostic {name} at t={state.t!r}")
    return DiagnosticsRecord(**values)


def bootstrap_status(history: Sequence[DiagnosticsRecord]) -> float:
    """
    Current bootstrap quantity q(t) = t * max over history of linf_omega_rz.

    Raises:
        SimulationError: If history is empty
    """
    if not history:
        raise SimulationError("bootstrap_status needs a non-empty history")
    return history[-1].t * max(entry.linf_omega_rz for entry in history)


def first_bootstrap_violation(history: Sequence[DiagnosticsRecord]) -> Optional[int]:
    """Index of the first record with q > 1, or None."""
    running_sup = 0.0
    for index, entry in enumerate(history):
        running_sup = max(running_sup, entry.linf_omega_rz)
        if entry.t * running_sup > BOOTSTRAP_THRESHOLD:
            return index
    return None


def breakdown_time(history: Sequence[DiagnosticsRecord], events: Sequence[BreakdownEvent]) -> BreakdownVerdict:
    """
    Reduce a run's reason stream to its breakdown verdict.

    The earliest event wins, ties broken by the precedence nonfinite, cfl_floor,
    norm_cap, bootstrap_violated. t_proxy is the last recorded t before the event;
    without events it is the last recorded t and the reason is none.

    Args:
        history: Records of the run
        events: Reason stream of the run

    Returns:
        BreakdownVerdict
    """
    if not events:
        return BreakdownVerdict(history[-1].t if history else 0.0, BreakdownReason.NONE)

    first = min(events, key=lambda event: (event.index, _PRECEDENCE[event.reason]))
    index = min(first.index, len(history))
    t_proxy = history[index - 1].t if index >= 1 else 0.0
    return BreakdownVerdict(t_proxy, first.reason)


def write_csv(records: Sequence[DiagnosticsRecord], path: str) -> None:
    """
    Write records as CSV: header of column names, one row per record.

    Raises:
        OSError: If the file cannot be written
    """
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(DiagnosticsRecord.column_names())
        for entry in records:
            writer.writerow([repr(float(value)) for value in astuple(entry)])
    logger.debug(f"Wrote {len(records)} diagnostics rows to {path}")


def read_csv(path: str) -> List[DiagnosticsRecord]:
    """
    Read a file written by write_csv.

    Raises:
        SimulationError: If the header does not match the record columns
        OSError: If the file cannot be read
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != DiagnosticsRecord.column_names():
            raise SimulationError(f"unexpected diagnostics header in {path}")
        return [DiagnosticsRecord(*(float(cell) for cell in row)) for row in reader if row]
