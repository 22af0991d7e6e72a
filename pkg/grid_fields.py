"""
Grid and field utilities for the axisymmetric Hall-MHD lab.

This module discretizes the meridian half-plane (r, z) of a truncated cylinder and
holds axisymmetric scalar fields sampled on it.

Key features:
- Cell-centered radii r_i = (i + 1/2) h_r, so 1/r factors stay finite on the grid
- Periodic axial direction z_j = j h_z
- Reflection parity tag on every field, realized as a ghost row at the axis
- Homogeneous Dirichlet ghost row beyond r_max
- Midpoint quadrature of the 3-D Lebesgue norms 2 pi int int |f|^p r dr dz
- Discrete H^k surrogate built from mixed central differences
"""

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.core import FieldValueError, GridError, SimulationError, get_logger, validate_grid_parameters

logger = get_logger(__name__, "grid_fields")

MAX_SOBOLEV_ORDER = 3


class Parity(Enum):
    """Reflection symmetry f(-r) = +/- f(r) of an axisymmetric component."""

    EVEN = "even"
    ODD = "odd"

    @property
    def sign(self) -> float:
        return 1.0 if self is Parity.EVEN else -1.0

    def flipped(self) -> "Parity":
        return Parity.ODD if self is Parity.EVEN else Parity.EVEN


@dataclass(frozen=True)
class Grid:
    """Truncated cylinder [0, r_max] x [0, z_len) with cell-centered radii."""

    n_r: int
    n_z: int
    r_max: float
    z_len: float

    def __post_init__(self):
        validate_grid_parameters(self.n_r, self.n_z, self.r_max, self.z_len)

    @property
    def h_r(self) -> float:
        return self.r_max / self.n_r

    @property
    def h_z(self) -> float:
        return self.z_len / self.n_z

    @property
    def h_min(self) -> float:
        return min(self.h_r, self.h_z)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.n_r, self.n_z)

    @cached_property
    def r_nodes(self) -> np.ndarray:
        nodes = (np.arange(self.n_r, dtype=np.float64) + 0.5) * self.h_r
        nodes.setflags(write=False)
        return nodes

    @cached_property
    def z_nodes(self) -> np.ndarray:
        nodes = np.arange(self.n_z, dtype=np.float64) * self.h_z
        nodes.setflags(write=False)
        return nodes

    @property
    def r_column(self) -> np.ndarray:
        """Radii shaped (n_r, 1) for broadcasting against field arrays."""
        return self.r_nodes[:, np.newaxis]

    @property
    def z_center(self) -> float:
        return 0.5 * self.z_len

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """Return (R, Z) node coordinates with ij indexing."""
        return np.meshgrid(self.r_nodes, self.z_nodes, indexing="ij")

    def describe(self) -> str:
        return f"{self.n_r}x{self.n_z} grid, r_max={self.r_max!r}, z_len={self.z_len!r}"


def make_grid(n_r: int, n_z: int, r_max: float, z_len: float) -> Grid:
    """
    Build a grid of the meridian half-plane.

    Args:
        n_r: Number of radial cells (>= 8)
        n_z: Number of axial cells (>= 8)
        r_max: Radial extent
        z_len: Axial period

    Returns:
        Grid with r_nodes[0] = h_r / 2

    Raises:
        GridError: If extents are not positive or there are too few cells
    """
    if isinstance(r_max, int) and not isinstance(r_max, bool):
        r_max = float(r_max)
    if isinstance(z_len, int) and not isinstance(z_len, bool):
        z_len = float(z_len)
    grid = Grid(n_r=n_r, n_z=n_z, r_max=r_max, z_len=z_len)
    logger.debug(f"Created {grid.describe()} with h_r={grid.h_r:.6g}, h_z={grid.h_z:.6g}")
    return grid


def first_nonfinite(values: np.ndarray) -> Optional[Tuple[int, int]]:
    """Return the (i, j) index of the first non-finite entry, or None."""
    finite = np.isfinite(values)
    if finite.all():
        return None
    i, j = np.argwhere(~finite)[0]
    return int(i), int(j)


def _nonfinite_message(grid: Grid, node: Tuple[int, int], what: str) -> str:
    i, j = node
    return f"non-finite {what} at node (i={i}, j={j}), r={grid.r_nodes[i]:.6g}, z={grid.z_nodes[j]:.6g}"


@dataclass(frozen=True, eq=False)
class ScalarField:
    """One axisymmetric scalar on a grid, tagged with its axis parity.

    Values are copied on construction and stored read-only.
    """

    grid: Grid
    values: np.ndarray
    parity: Parity

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            raise GridError(f"field shape {values.shape} does not match grid shape {self.grid.shape}")
        node = first_nonfinite(values)
        if node is not None:
            raise FieldValueError(_nonfinite_message(self.grid, node, "field value"), node=node)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid, parity: Parity) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape), parity)

    def with_values(self, values: np.ndarray, parity: Optional[Parity] = None) -> "ScalarField":
        return ScalarField(self.grid, values, self.parity if parity is None else parity)

    def scaled(self, factor: float) -> "ScalarField":
        return ScalarField(self.grid, factor * self.values, self.parity)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def field_from_fn(grid: Grid, f: Callable[[np.ndarray, np.ndarray], np.ndarray], parity: Parity) -> ScalarField:
    """
    Sample an analytic function on the grid nodes.

    The function is called once with the (R, Z) node arrays and must be
    vectorized over them; a scalar result is broadcast.

    Args:
        grid: Target grid
        f: Function of (r, z)
        parity: Parity to record (not checked analytically)

    Returns:
        Sampled field

    Raises:
        FieldValueError: If any sample is non-finite
    """
    r_mesh, z_mesh = grid.mesh()
    with np.errstate(all="ignore"):
        sampled = np.asarray(f(r_mesh, z_mesh), dtype=np.float64)
    sampled = np.array(np.broadcast_to(sampled, grid.shape))

    node = first_nonfinite(sampled)
    if node is not None:
        raise FieldValueError(_nonfinite_message(grid, node, "sample"), node=node)
    return ScalarField(grid, sampled, parity)


def pad_r(values: np.ndarray, parity: Parity) -> np.ndarray:
    """Add the axis parity ghost row and the Dirichlet-0 row beyond r_max."""
    n_r, n_z = values.shape
    padded = np.empty((n_r + 2, n_z))
    padded[1:-1] = values
    padded[0] = parity.sign * values[0]
    padded[-1] = 0.0
    return padded


def ghost_extend(field: ScalarField) -> np.ndarray:
    """Return the field with ghost rows at i = -1 and i = n_r, shape (n_r + 2, n_z)."""
    return pad_r(field.values, field.parity)


def difference_r(values: np.ndarray, parity: Parity, grid: Grid) -> np.ndarray:
    """Second-order central r-difference; the result has the flipped parity."""
    padded = pad_r(values, parity)
    return (padded[2:] - padded[:-2]) / (2.0 * grid.h_r)


def difference_z(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Second-order central z-difference with periodic wrap."""
    return (np.roll(values, -1, axis=1) - np.roll(values, 1, axis=1)) / (2.0 * grid.h_z)


def second_difference_z(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Compact three-point z second difference with periodic wrap."""
    return (np.roll(values, -1, axis=1) - 2.0 * values + np.roll(values, 1, axis=1)) / grid.h_z**2


def quadrature_weights(grid: Grid) -> np.ndarray:
    """Midpoint weights 2 pi r_i h_r h_z, shaped (n_r, 1)."""
    return 2.0 * math.pi * grid.r_column * grid.h_r * grid.h_z


def axis_weights(grid: Grid) -> np.ndarray:
    """Axis-corrected cell weights V_i = r_i + h_r^2 / (8 r_i).

    laplacian_minus is exactly symmetric in the inner product sum f g V.
    """
    r = grid.r_nodes
    return r + grid.h_r**2 / (8.0 * r)


def _lp_of_array(values: np.ndarray, grid: Grid, p: float) -> float:
    magnitude = np.abs(values)
    if p == math.inf:
        return float(magnitude.max())
    weights = quadrature_weights(grid)
    if p == 1:
        return float(np.sum(magnitude * weights))
    if p == 2:
        return math.sqrt(float(np.sum(magnitude * magnitude * weights)))
    return float(np.sum(magnitude**p * weights)) ** (1.0 / p)


def lp_norm(field: ScalarField, p: float) -> float:
    """
    Discrete L^p(R^3) norm of an axisymmetric field.

    Args:
        field: Field to measure
        p: Exponent in [1, inf]

    Returns:
        Midpoint quadrature of (2 pi int int |f|^p r dr dz)^(1/p); the sample
        maximum of |f| for p = inf

    Raises:
        SimulationError: If p < 1
    """
    if not p >= 1:
        raise SimulationError(f"p must be >= 1, got {p!r}")
    return _lp_of_array(field.values, field.grid, p)


def lp_norm_of_values(values: np.ndarray, grid: Grid, p: float) -> float:
    """lp_norm for a raw (n_r, n_z) array such as a pointwise magnitude."""
    if not p >= 1:
        raise SimulationError(f"p must be >= 1, got {p!r}")
    return _lp_of_array(values, grid, p)


def mixed_derivative(field: ScalarField, r_order: int, z_order: int) -> ScalarField:
    """Apply the central r-difference r_order times and the z-difference z_order times."""
    values = field.values
    parity = field.parity
    for _ in range(r_order):
        values = difference_r(values, parity, field.grid)
        parity = parity.flipped()
    for _ in range(z_order):
        values = difference_z(values, field.grid)
    return ScalarField(field.grid, values, parity)


def _shared_grid(fields: Sequence[ScalarField]) -> Optional[Grid]:
    grids = {field.grid for field in fields}
    if len(grids) > 1:
        raise GridError("fields must share one grid")
    return next(iter(grids)) if grids else None


def sobolev_norm(fields: Iterable[ScalarField], order: int) -> float:
    """
    Squared discrete H^order surrogate of a set of fields.

    Sums lp_norm(D^alpha f, 2)^2 over the fields and over all mixed central
    differences with |alpha| <= order. Curvature (1/r) terms of the Cartesian
    norm of vector fields are omitted.

    Args:
        fields: Fields on a common grid
        order: Highest derivative order, at most 3

    Returns:
        Non-negative surrogate value

    Raises:
        SimulationError: If order is outside [0, 3]
        GridError: If the fields live on different grids
    """
    if isinstance(order, bool) or not isinstance(order, int) or not 0 <= order <= MAX_SOBOLEV_ORDER:
        raise SimulationError(f"order must be an integer in [0, {MAX_SOBOLEV_ORDER}], got {order!r}")

    field_list: List[ScalarField] = list(fields)
    _shared_grid(field_list)

    total = 0.0
    for field in field_list:
        for r_order in range(order + 1):
            for z_order in range(order + 1 - r_order):
                derivative = mixed_derivative(field, r_order, z_order)
                total += lp_norm(derivative, 2) ** 2
    return total


def gradient_magnitude(field: ScalarField) -> ScalarField:
    """Pointwise |grad f| = sqrt(f_r^2 + f_z^2), tagged even."""
    grid = field.grid
    d_r = difference_r(field.values, field.parity, grid)
    d_z = difference_z(field.values, grid)
    return ScalarField(grid, np.hypot(d_r, d_z), Parity.EVEN)
