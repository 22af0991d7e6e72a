"""
Tests for grid_fields module.
"""

import math
import unittest

import numpy as np
import numpy.testing as npt

from grid_fields import (
    Grid,
    Parity,
    ScalarField,
    axis_weights,
    difference_r,
    field_from_fn,
    ghost_extend,
    gradient_magnitude,
    lp_norm,
    make_grid,
    quadrature_weights,
    sobolev_norm,
)
from src.core import FieldValueError, GridError, SimulationError


class TestGrid(unittest.TestCase):
    """Test grid construction and node placement."""

    def test_cell_centered_radii(self):
        """Test that the first radius is half a cell off the axis."""
        grid = make_grid(16, 32, 4.0, 8.0)
        self.assertAlmostEqual(grid.h_r, 0.25)
        self.assertAlmostEqual(grid.h_z, 0.25)
        self.assertAlmostEqual(grid.r_nodes[0], 0.125)
        self.assertAlmostEqual(grid.r_nodes[-1], 4.0 - 0.125)
        self.assertEqual(grid.z_nodes[0], 0.0)
        self.assertAlmostEqual(grid.z_nodes[-1], 8.0 - 0.25)
        self.assertEqual(grid.shape, (16, 32))

    def test_integer_extents_are_converted(self):
        """Test that integer extents produce the same grid as float extents."""
        self.assertEqual(make_grid(16, 16, 4, 8), make_grid(16, 16, 4.0, 8.0))

    def test_too_few_cells_rejected(self):
        """Test that fewer than 8 cells raise GridError."""
        with self.assertRaises(GridError) as context:
            make_grid(4, 16, 1.0, 1.0)
        self.assertIn("n_r must be an integer >= 8", str(context.exception))

    def test_non_positive_extent_rejected(self):
        """Test that zero or infinite extents raise GridError."""
        with self.assertRaises(GridError):
            make_grid(16, 16, 0.0, 1.0)
        with self.assertRaises(GridError):
            make_grid(16, 16, 1.0, math.inf)

    def test_nodes_are_read_only(self):
        """Test that cached node arrays cannot be modified."""
        grid = make_grid(8, 8, 1.0, 1.0)
        with self.assertRaises(ValueError):
            grid.r_nodes[0] = 1.0

    def test_grid_is_hashable(self):
        """Test that equal grids hash equally for per-grid caches."""
        self.assertEqual(hash(Grid(8, 8, 1.0, 2.0)), hash(Grid(8, 8, 1.0, 2.0)))


class TestScalarField(unittest.TestCase):
    """Test field construction and validation."""

    def setUp(self):
        self.grid = make_grid(8, 8, 2.0, 2.0)

    def test_shape_mismatch_rejected(self):
        """Test that values of the wrong shape raise GridError."""
        with self.assertRaises(GridError):
            ScalarField(self.grid, np.zeros((8, 9)), Parity.EVEN)

    def test_non_finite_value_names_node(self):
        """Test that a NaN entry raises FieldValueError with its node."""
        values = np.zeros(self.grid.shape)
        values[2, 5] = np.nan
        with self.assertRaises(FieldValueError) as context:
            ScalarField(self.grid, values, Parity.EVEN)
        self.assertEqual(context.exception.node, (2, 5))
        self.assertIn("i=2, j=5", str(context.exception))

    def test_values_are_copied_and_frozen(self):
        """Test that the field owns a read-only copy of its values."""
        values = np.ones(self.grid.shape)
        field = ScalarField(self.grid, values, Parity.EVEN)
        values[0, 0] = 5.0
        self.assertEqual(field.values[0, 0], 1.0)
        with self.assertRaises(ValueError):
            field.values[0, 0] = 2.0

    def test_helpers(self):
        """Test zeros, scaled and max_abs."""
        field = ScalarField(self.grid, -2.0 * np.ones(self.grid.shape), Parity.ODD)
        self.assertEqual(field.max_abs(), 2.0)
        self.assertEqual(field.scaled(0.5).max_abs(), 1.0)
        self.assertIs(field.scaled(0.5).parity, Parity.ODD)
        self.assertEqual(ScalarField.zeros(self.grid, Parity.EVEN).max_abs(), 0.0)
        self.assertIs(field.with_values(field.values, Parity.EVEN).parity, Parity.EVEN)


class TestFieldFromFn(unittest.TestCase):
    """Test analytic sampling."""

    def setUp(self):
        self.grid = make_grid(8, 16, 2.0, 4.0)

    def test_samples_at_nodes(self):
        """Test that f(r, z) = r + 10 z is sampled on the node mesh."""
        field = field_from_fn(self.grid, lambda r, z: r + 10.0 * z, Parity.EVEN)
        self.assertAlmostEqual(field.values[3, 5], self.grid.r_nodes[3] + 10.0 * self.grid.z_nodes[5])

    def test_scalar_result_is_broadcast(self):
        """Test that a constant function fills the grid."""
        field = field_from_fn(self.grid, lambda r, z: 3.0, Parity.EVEN)
        npt.assert_array_equal(field.values, 3.0)

    def test_non_finite_sample_reports_node(self):
        """Test that 1/(r - r_2) fails at the node where it blows up."""
        r_bad = self.grid.r_nodes[2]
        with self.assertRaises(FieldValueError) as context:
            field_from_fn(self.grid, lambda r, z: 1.0 / (r - r_bad), Parity.EVEN)
        self.assertEqual(context.exception.node[0], 2)


class TestGhostCells(unittest.TestCase):
    """Test parity ghost rows and axis stencils."""

    def setUp(self):
        self.grid = make_grid(8, 8, 2.0, 2.0)
        rng = np.random.default_rng(1)
        self.values = rng.standard_normal(self.grid.shape)

    def test_even_and_odd_ghost_rows(self):
        """Test the sign of the axis ghost and the Dirichlet row."""
        even = ghost_extend(ScalarField(self.grid, self.values, Parity.EVEN))
        odd = ghost_extend(ScalarField(self.grid, self.values, Parity.ODD))
        self.assertEqual(even.shape, (10, 8))
        npt.assert_array_equal(even[0], self.values[0])
        npt.assert_array_equal(odd[0], -self.values[0])
        npt.assert_array_equal(even[-1], 0.0)
        npt.assert_array_equal(odd[1:-1], self.values)

    def test_radial_difference_of_r_is_one(self):
        """Test that D_r r = 1 up to the axis with the odd ghost."""
        r_values = np.repeat(self.grid.r_column, self.grid.n_z, axis=1)
        derivative = difference_r(r_values, Parity.ODD, self.grid)
        npt.assert_allclose(derivative[:-1], 1.0, atol=1e-12)

    def test_radial_difference_of_even_field_at_axis(self):
        """Test that D_r of r^2 is 2r, including the first row."""
        squared = np.repeat(self.grid.r_column**2, self.grid.n_z, axis=1)
        derivative = difference_r(squared, Parity.EVEN, self.grid)
        npt.assert_allclose(derivative[:-1], 2.0 * self.grid.r_column[:-1] * np.ones((1, 8)), atol=1e-12)


class TestNorms(unittest.TestCase):
    """Test quadrature norms and the Sobolev surrogate."""

    def test_constant_l1_is_cylinder_volume(self):
        """Test that the L1 norm of 1 is pi r_max^2 z_len (midpoint is exact for r)."""
        grid = make_grid(16, 8, 2.0, 3.0)
        one = ScalarField(grid, np.ones(grid.shape), Parity.EVEN)
        self.assertAlmostEqual(lp_norm(one, 1), math.pi * 4.0 * 3.0, places=10)

    def test_gaussian_l2_matches_closed_form(self):
        """Test ||exp(-r^2 - (z - z_c)^2)||_2 = (pi/2)^(3/4) to 1e-4 relative at 256 x 256."""
        grid = make_grid(256, 256, 8.0, 16.0)
        field = field_from_fn(grid, lambda r, z: np.exp(-(r**2) - (z - grid.z_center) ** 2), Parity.EVEN)
        expected = (math.pi / 2.0) ** 0.75
        self.assertAlmostEqual(lp_norm(field, 2), expected, delta=1e-4 * expected)

    def test_gaussian_l2_converges_at_second_order(self):
        """Test that the quadrature error of ||f||_2^2 drops by about 4 per refinement."""
        exact = (math.pi / 2.0) ** 1.5
        errors = []
        for n in (32, 64):
            grid = make_grid(n, n, 8.0, 16.0)
            field = field_from_fn(grid, lambda r, z: np.exp(-(r**2) - (z - grid.z_center) ** 2), Parity.EVEN)
            errors.append(abs(lp_norm(field, 2) ** 2 - exact))
        self.assertGreater(errors[0] / errors[1], 3.5)

    def test_sup_norm_is_sample_maximum(self):
        """Test that p = inf gives exp(-r_0^2) on the centered bump."""
        grid = make_grid(32, 32, 4.0, 8.0)
        field = field_from_fn(grid, lambda r, z: np.exp(-(r**2) - (z - grid.z_center) ** 2), Parity.EVEN)
        self.assertAlmostEqual(lp_norm(field, math.inf), math.exp(-grid.r_nodes[0] ** 2))

    def test_p_below_one_rejected(self):
        """Test that p < 1 raises SimulationError."""
        grid = make_grid(8, 8, 1.0, 1.0)
        with self.assertRaises(SimulationError):
            lp_norm(ScalarField.zeros(grid, Parity.EVEN), 0.5)

    def test_sobolev_order_zero_is_sum_of_squares(self):
        """Test that the order-0 surrogate is the sum of squared L2 norms."""
        grid = make_grid(16, 16, 2.0, 2.0)
        rng = np.random.default_rng(7)
        fields = [ScalarField(grid, rng.standard_normal(grid.shape), Parity.ODD) for _ in range(3)]
        expected = sum(lp_norm(field, 2) ** 2 for field in fields)
        self.assertAlmostEqual(sobolev_norm(fields, 0), expected, delta=1e-12 * expected)

    def test_sobolev_grows_with_order(self):
        """Test that adding derivative orders never decreases the surrogate."""
        grid = make_grid(16, 16, 4.0, 8.0)
        field = field_from_fn(grid, lambda r, z: np.exp(-(r**2) - (z - 4.0) ** 2), Parity.EVEN)
        values = [sobolev_norm([field], order) for order in range(4)]
        self.assertEqual(values, sorted(values))

    def test_sobolev_rejects_bad_order_and_mixed_grids(self):
        """Test order validation and the common-grid requirement."""
        first = ScalarField.zeros(make_grid(8, 8, 1.0, 1.0), Parity.EVEN)
        second = ScalarField.zeros(make_grid(16, 8, 1.0, 1.0), Parity.EVEN)
        with self.assertRaises(SimulationError):
            sobolev_norm([first], 4)
        with self.assertRaises(GridError):
            sobolev_norm([first, second], 1)

    def test_weights(self):
        """Test quadrature and axis-corrected weights."""
        grid = make_grid(8, 8, 2.0, 2.0)
        weights = quadrature_weights(grid)
        self.assertEqual(weights.shape, (8, 1))
        self.assertAlmostEqual(float(weights.sum()) * grid.n_z, math.pi * 4.0 * 2.0)
        npt.assert_allclose(axis_weights(grid), grid.r_nodes + grid.h_r**2 / (8.0 * grid.r_nodes))

    def test_gradient_magnitude_of_linear_z(self):
        """Test |grad f| = 1 for f = z away from the periodic seam."""
        grid = make_grid(8, 16, 2.0, 4.0)
        field = field_from_fn(grid, lambda r, z: z, Parity.EVEN)
        magnitude = gradient_magnitude(field)
        npt.assert_allclose(magnitude.values[:-1, 1:-1], 1.0, atol=1e-12)


if __name__ == "__main__":
    unittest.main()
