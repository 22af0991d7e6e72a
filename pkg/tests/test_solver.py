"""
Tests for solver module.
"""

import math
import os
import struct
import tempfile
import unittest

import numpy as np
import numpy.testing as npt

from diagnostics import BreakdownReason, write_csv
from grid_fields import make_grid
from operators import curl_axisym
from solver import (
    BumpShape,
    InitialDataSpec,
    PhysicalParams,
    RunControl,
    State,
    Tendency,
    TerminationReason,
    _hall_term,
    cfl_dt,
    checkpoint_load,
    checkpoint_save,
    compute_rhs,
    init_state,
    resume,
    run,
    ssp_rk3,
    step,
)
from src.core import CalibrationError, CflFloorError, CheckpointError, ConfigurationError, GridError


def random_state(grid, t=0.125, params=None, seed=0):
    rng = np.random.default_rng(seed)
    arrays = [rng.standard_normal(grid.shape) for _ in range(3)]
    return State.from_arrays(grid, t, arrays, params or PhysicalParams())


class TestParameters(unittest.TestCase):
    """Test parameter and control validation."""

    def test_negative_viscosity_rejected(self):
        """Test that nu < 0 raises ConfigurationError."""
        with self.assertRaises(ConfigurationError) as context:
            PhysicalParams(nu=-1.0)
        self.assertEqual(str(context.exception), "nu must be ≥ 0")

    def test_non_finite_parameter_rejected(self):
        """Test that NaN and infinite coefficients are rejected."""
        with self.assertRaises(ConfigurationError):
            PhysicalParams(hall=math.nan)
        with self.assertRaises(ConfigurationError):
            PhysicalParams(mu0_inv=math.inf)

    def test_bump_shape_validation(self):
        """Test unknown kinds and non-positive widths."""
        with self.assertRaises(ConfigurationError):
            BumpShape(kind="square")
        with self.assertRaises(ConfigurationError):
            BumpShape(width=0.0)

    def test_run_control_validation(self):
        """Test record cadence, safety factor and checkpoint path checks."""
        with self.assertRaises(ConfigurationError):
            RunControl(record_every=0)
        with self.assertRaises(ConfigurationError):
            RunControl(cfl_safety=1.5)
        with self.assertRaises(ConfigurationError):
            RunControl(checkpoint_every=5)

    def test_state_fields_must_share_grid(self):
        """Test that mixing grids in one state raises GridError."""
        first = State.zeros(make_grid(8, 8, 1.0, 1.0))
        other = State.zeros(make_grid(16, 8, 1.0, 1.0))
        with self.assertRaises(GridError):
            State(0.0, first.gamma, other.omega, first.big_h, PhysicalParams())


class TestInitialData(unittest.TestCase):
    """Test initial-state construction and swirl calibration."""

    def setUp(self):
        self.grid = make_grid(32, 32, 8.0, 16.0)

    def test_swirl_calibrated_to_eps(self):
        """Test that sup |(omega_r, omega_z)| matches eps = 1e-2 to 0.1%."""
        state = init_state(self.grid, InitialDataSpec(eps=1e-2), PhysicalParams())
        b = state.velocity()
        size = float(np.max(curl_axisym(state.swirl(), b).meridian_magnitude()))
        self.assertAlmostEqual(size, 1e-2, delta=1e-5)

    def test_ring_swirl_calibrated(self):
        """Test calibration of a toroidal profile."""
        spec = InitialDataSpec(eps=0.1, swirl_shape=BumpShape(kind="ring", width=0.8, ring_radius=2.0))
        state = init_state(self.grid, spec, PhysicalParams())
        size = float(np.max(curl_axisym(state.swirl(), state.velocity()).meridian_magnitude()))
        self.assertAlmostEqual(size, 0.1, delta=1e-4)

    def test_zero_eps_gives_zero_swirl(self):
        """Test that eps = 0 leaves Gamma identically zero."""
        state = init_state(self.grid, InitialDataSpec(eps=0.0), PhysicalParams())
        self.assertEqual(state.gamma.max_abs(), 0.0)
        self.assertGreater(state.big_h.max_abs(), 0.0)

    def test_zero_profile_cannot_carry_eps(self):
        """Test that eps > 0 with a zero swirl profile raises CalibrationError."""
        spec = InitialDataSpec(eps=1e-3, swirl_shape=BumpShape(kind="zero"))
        with self.assertRaises(CalibrationError):
            init_state(self.grid, spec, PhysicalParams())

    def test_amplitudes_scale_profiles(self):
        """Test that H and Omega peak at their amplitudes on the axis-adjacent row."""
        spec = InitialDataSpec(eps=0.0, h_amp=2.0, omega_amp=0.25)
        state = init_state(self.grid, spec, PhysicalParams())
        r0 = self.grid.r_nodes[0]
        self.assertAlmostEqual(state.big_h.max_abs(), 2.0 * math.exp(-(r0**2)))
        self.assertAlmostEqual(state.omega.max_abs(), 0.25 * math.exp(-(r0**2)))


class TestRightHandSide(unittest.TestCase):
    """Test tendencies, time steps and the integrator."""

    def setUp(self):
        self.grid = make_grid(16, 16, 4.0, 8.0)

    def test_zero_state_is_fixed_point(self):
        """Test that the zero state has zero tendency and does not move."""
        state = State.zeros(self.grid)
        tendency = compute_rhs(state)
        for values in tendency.arrays():
            npt.assert_array_equal(values, 0.0)
        advanced = step(state, 0.01)
        self.assertAlmostEqual(advanced.t, 0.01)
        for values in advanced.arrays():
            npt.assert_array_equal(values, 0.0)

    def test_hall_term_conserves_row_energy(self):
        """Test that sum_j H * hall_term vanishes on every radial row."""
        rng = np.random.default_rng(2)
        big_h = rng.standard_normal(self.grid.shape)
        products = np.sum(big_h * _hall_term(big_h, self.grid), axis=1)
        npt.assert_allclose(products, 0.0, atol=1e-10)

    def test_forcing_is_added(self):
        """Test that a forcing callable shifts the tendency."""
        state = State.zeros(self.grid)
        shift = Tendency.from_arrays(self.grid, [np.full(self.grid.shape, 3.0)] * 3)
        tendency = compute_rhs(state, lambda t: shift)
        npt.assert_array_equal(tendency.d_big_h.values, 3.0)
        npt.assert_array_equal(tendency.d_gamma.values, 3.0)

    def test_diffusive_step_limit(self):
        """Test dt = safety h^2 / (20 nu) on a quiescent state."""
        dt = cfl_dt(State.zeros(self.grid), 0.4)
        self.assertAlmostEqual(dt, 0.4 * self.grid.h_min**2 / 20.0)

    def test_step_floor(self):
        """Test that a step below dt_min raises CflFloorError."""
        with self.assertRaises(CflFloorError) as context:
            cfl_dt(State.zeros(self.grid), 0.4, dt_min=1.0)
        self.assertEqual(context.exception.reason, "cfl_floor")

    def test_ssp_rk3_stability_polynomial(self):
        """Test that y' = -y advances by 1 - dt + dt^2/2 - dt^3/6."""
        dt = 0.1
        (result,) = ssp_rk3((np.array([1.0]),), 0.0, dt, lambda t, y: (-y[0],))
        self.assertAlmostEqual(result[0], 1.0 - dt + dt**2 / 2.0 - dt**3 / 6.0, places=15)

    def test_ssp_rk3_stage_times(self):
        """Test that y' = t^2 is integrated exactly over one step."""
        dt = 0.3
        (result,) = ssp_rk3((np.array([0.0]),), 0.0, dt, lambda t, y: (np.array([t * t]),))
        self.assertAlmostEqual(result[0], dt**3 / 3.0, places=14)

    def test_swirl_stays_zero(self):
        """Test that Gamma remains exactly zero when it starts at zero."""
        state = init_state(self.grid, InitialDataSpec(eps=0.0), PhysicalParams())
        for _ in range(5):
            state = step(state, cfl_dt(state, 0.4))
        npt.assert_array_equal(state.gamma.values, 0.0)


class TestCheckpoint(unittest.TestCase):
    """Test the binary checkpoint format."""

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.temp_dir.name, "state.axhm")
        self.grid = make_grid(8, 16, 2.0, 4.0)
        self.state = random_state(self.grid, params=PhysicalParams(nu=0.3, hall=2.0, mu0_inv=0.5))

    def tearDown(self):
        self.temp_dir.cleanup()

    def _bytes(self):
        checkpoint_save(self.state, self.path)
        with open(self.path, "rb") as handle:
            return handle.read()

    def _write(self, data):
        with open(self.path, "wb") as handle:
            handle.write(data)

    def test_roundtrip_is_bit_exact(self):
        """Test that save followed by load restores every bit."""
        checkpoint_save(self.state, self.path)
        loaded = checkpoint_load(self.path, expected_grid=self.grid)
        self.assertEqual(loaded.t, self.state.t)
        self.assertEqual(loaded.params, self.state.params)
        self.assertEqual(loaded.grid, self.grid)
        for original, restored in zip(self.state.arrays(), loaded.arrays()):
            npt.assert_array_equal(original, restored)

    def test_file_size(self):
        """Test the 64-byte header followed by three float64 arrays."""
        self.assertEqual(len(self._bytes()), 64 + 3 * 8 * 16 * 8)

    def test_truncated_header(self):
        """Test that a short file is rejected."""
        self._write(self._bytes()[:10])
        with self.assertRaises(CheckpointError) as context:
            checkpoint_load(self.path)
        self.assertIn("truncated checkpoint header", str(context.exception))

    def test_truncated_body(self):
        """Test that a missing tail is rejected."""
        self._write(self._bytes()[:-8])
        with self.assertRaises(CheckpointError) as context:
            checkpoint_load(self.path)
        self.assertIn("truncated checkpoint", str(context.exception))

    def test_trailing_bytes(self):
        """Test that extra bytes are rejected."""
        self._write(self._bytes() + b"\0")
        with self.assertRaises(CheckpointError) as context:
            checkpoint_load(self.path)
        self.assertIn("trailing bytes", str(context.exception))

    def test_bad_magic(self):
        """Test that a foreign file is rejected."""
        self._write(b"XXXX" + self._bytes()[4:])
        with self.assertRaises(CheckpointError) as context:
            checkpoint_load(self.path)
        self.assertIn("bad magic", str(context.exception))

    def test_unsupported_version(self):
        """Test that version 2 is rejected."""
        data = self._bytes()
        self._write(data[:4] + struct.pack("<I", 2) + data[8:])
        with self.assertRaises(CheckpointError) as context:
            checkpoint_load(self.path)
        self.assertIn("unsupported version 2", str(context.exception))

    def test_grid_mismatch(self):
        """Test that resuming on another grid is rejected."""
        checkpoint_save(self.state, self.path)
        with self.assertRaises(CheckpointError) as context:
            checkpoint_load(self.path, expected_grid=make_grid(16, 16, 2.0, 4.0))
        self.assertIn("grid mismatch on resume", str(context.exception))

    def test_missing_file_raises_os_error(self):
        """Test that I/O failures keep their type."""
        with self.assertRaises(OSError):
            checkpoint_load(os.path.join(self.temp_dir.name, "missing.axhm"))


class TestRun(unittest.TestCase):
    """Test the stepping loop and its termination reasons."""

    def setUp(self):
        self.grid = make_grid(16, 16, 4.0, 8.0)
        self.temp_dir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.temp_dir.cleanup()

    def test_zero_end_time(self):
        """Test that t_end = 0 records the initial state and takes no steps."""
        state, history, reason = run(self.grid, InitialDataSpec(), PhysicalParams(), RunControl(t_end=0.0))
        self.assertEqual(reason, TerminationReason.COMPLETED)
        self.assertEqual(len(history), 1)
        self.assertEqual(state.t, 0.0)

    def test_short_run_completes_at_end_time(self):
        """Test that a short run lands exactly on t_end with a final record."""
        outcome = run(self.grid, InitialDataSpec(), PhysicalParams(), RunControl(t_end=0.02, record_every=3))
        self.assertEqual(outcome.reason, TerminationReason.COMPLETED)
        self.assertEqual(outcome.state.t, 0.02)
        self.assertEqual(outcome.history[-1].t, 0.02)
        self.assertEqual(outcome.verdict.reason, BreakdownReason.NONE)
        self.assertEqual(outcome.verdict.t_proxy, 0.02)
        self.assertEqual(outcome.events, [])

    def test_cfl_floor_ends_run(self):
        """Test that an unreachable dt_min ends the run at t = 0."""
        outcome = run(self.grid, InitialDataSpec(), PhysicalParams(), RunControl(t_end=1.0, dt_min=1.0))
        self.assertEqual(outcome.reason, TerminationReason.CFL_FLOOR)
        self.assertEqual(outcome.verdict.reason, BreakdownReason.CFL_FLOOR)
        self.assertEqual(outcome.verdict.t_proxy, 0.0)
        self.assertEqual(outcome.steps, 0)

    def test_large_swirl_breaks_down(self):
        """Test that eps = 10 ends before t_end with a breakdown reason."""
        control = RunControl(t_end=1.0, record_every=1)
        outcome = run(self.grid, InitialDataSpec(eps=10.0), PhysicalParams(), control)
        self.assertNotEqual(outcome.reason, TerminationReason.COMPLETED)
        self.assertNotEqual(outcome.verdict.reason, BreakdownReason.NONE)
        self.assertLess(outcome.verdict.t_proxy, 1.0)

    def test_bootstrap_violation_recorded_without_stopping(self):
        """Test that q > 1 is recorded once and the run continues when asked to."""
        control = RunControl(t_end=0.2, record_every=1, norm_cap=1e300, stop_on_bootstrap=False)
        outcome = run(self.grid, InitialDataSpec(eps=10.0), PhysicalParams(), control)
        bootstrap_events = [e for e in outcome.events if e.reason is BreakdownReason.BOOTSTRAP_VIOLATED]
        self.assertEqual(len(bootstrap_events), 1)
        self.assertEqual(outcome.verdict.reason, BreakdownReason.BOOTSTRAP_VIOLATED)
        self.assertGreater(outcome.verdict.t_proxy, 0.0)
        self.assertLessEqual(outcome.verdict.t_proxy, 0.1 + 1e-9)
        self.assertGreater(len(outcome.history), bootstrap_events[0].index + 1)

    def test_bootstrap_time_follows_record_cadence(self):
        """Test that t_proxy is a recorded time and per-step records detect q > 1 no later."""
        outcomes = {}
        for every in (1, 4):
            control = RunControl(t_end=0.2, record_every=every, norm_cap=1e300)
            outcomes[every] = run(self.grid, InitialDataSpec(eps=10.0), PhysicalParams(), control)

        violation_times = {}
        for every, outcome in outcomes.items():
            self.assertEqual(outcome.reason, TerminationReason.BOOTSTRAP_VIOLATED)
            self.assertIn(outcome.verdict.t_proxy, [entry.t for entry in outcome.history])
            violation_times[every] = outcome.history[outcome.events[0].index].t
        self.assertLessEqual(violation_times[1], violation_times[4])
        self.assertLess(outcomes[1].verdict.t_proxy, violation_times[4])

    def test_pure_diffusion_decays_magnetic_norms(self):
        """Test that ||H||_2 and ||H||_4 are non-increasing without swirl and Hall drift."""
        spec = InitialDataSpec(eps=0.0, omega_amp=0.0)
        params = PhysicalParams(nu=1.0, hall=0.0, mu0_inv=1e-12)
        outcome = run(self.grid, spec, params, RunControl(t_end=0.05, record_every=1))
        self.assertEqual(outcome.reason, TerminationReason.COMPLETED)
        for before, after in zip(outcome.history, outcome.history[1:]):
            self.assertLessEqual(after.l2_H, before.l2_H * (1.0 + 1e-8))
            self.assertLessEqual(after.l4_H, before.l4_H * (1.0 + 1e-8))
        self.assertLess(outcome.history[-1].l2_H, outcome.history[0].l2_H)

    def test_checkpoint_and_resume(self):
        """Test that a periodic checkpoint can be resumed to a later t_end."""
        path = os.path.join(self.temp_dir.name, "checkpoint.axhm")
        control = RunControl(t_end=0.01, checkpoint_every=2, checkpoint_path=path)
        first = run(self.grid, InitialDataSpec(), PhysicalParams(), control)
        self.assertTrue(os.path.exists(path))

        saved = checkpoint_load(path, expected_grid=self.grid)
        self.assertGreater(saved.t, 0.0)
        self.assertLessEqual(saved.t, first.state.t)

        resumed = resume(path, self.grid, RunControl(t_end=0.02))
        self.assertEqual(resumed.reason, TerminationReason.COMPLETED)
        self.assertEqual(resumed.state.t, 0.02)
        self.assertEqual(resumed.history[0].t, saved.t)

    def test_resume_on_other_grid_rejected(self):
        """Test that resuming with a different grid raises CheckpointError."""
        path = os.path.join(self.temp_dir.name, "checkpoint.axhm")
        checkpoint_save(State.zeros(self.grid), path)
        with self.assertRaises(CheckpointError):
            resume(path, make_grid(32, 16, 4.0, 8.0), RunControl(t_end=0.01))

class TestEstimateChain(unittest.TestCase):
    """Test the a-priori inequalities on a short default-bump run with swirl."""

    @classmethod
    def setUpClass(cls):
        cls.grid = make_grid(32, 32, 4.0, 8.0)
        cls.spec = InitialDataSpec(eps=0.1)
        cls.control = RunControl(t_end=0.2, record_every=5)
        cls.initial = init_state(cls.grid, cls.spec, PhysicalParams())
        cls.outcome = run(cls.grid, cls.spec, PhysicalParams(), cls.control)

    def test_run_completes(self):
        """Test that the reference run reaches t_end without a breakdown."""
        self.assertEqual(self.outcome.reason, TerminationReason.COMPLETED)
        self.assertGreater(len(self.outcome.history), 10)

    def test_energy_inequality(self):
        """Test E(t) <= E(0) (1 + V) with V = 1e-2 on every record."""
        e0 = self.outcome.history[0].l2_energy
        self.assertGreater(e0, 0.0)
        for entry in self.outcome.history:
            self.assertLessEqual(entry.l2_energy, e0 * (1.0 + 1e-2))

    def test_swirl_maximum_principle(self):
        """Test that max |Gamma| is not raised by transport beyond 1e-2 relative."""
        initial = self.initial.gamma.max_abs()
        self.assertGreater(initial, 0.0)
        self.assertLessEqual(self.outcome.state.gamma.max_abs(), initial * (1.0 + 1e-2))

    def test_swirl_growth_bound(self):
        """Test ||(omega_r, omega_z)||_inf <= eps exp(int ||grad u||_inf) on every record."""
        first = self.outcome.history[0]
        self.assertAlmostEqual(first.swirl_growth_bound, first.linf_omega_rz)
        npt.assert_allclose(first.linf_omega_rz, self.spec.eps, rtol=1e-3)
        for entry in self.outcome.history:
            self.assertLessEqual(entry.linf_omega_rz, entry.swirl_growth_bound * (1.0 + 1e-2))

    def test_hall_run_keeps_magnetic_norms_non_increasing(self):
        """Test that ||H||_2 and ||H||_4 do not grow per recorded interval with hall = 1 and Omega != 0."""
        self.assertGreater(self.initial.omega.max_abs(), 0.0)
        for before, after in zip(self.outcome.history, self.outcome.history[1:]):
            self.assertLessEqual(after.l2_H, before.l2_H * (1.0 + 1e-8))
            self.assertLessEqual(after.l4_H, before.l4_H * (1.0 + 1e-8))

    def test_rerun_writes_identical_csv(self):
        """Test that the same configuration reproduces the diagnostics CSV byte for byte."""
        repeated = run(self.grid, self.spec, PhysicalParams(), self.control)
        with tempfile.TemporaryDirectory() as temp_dir:
            first_path = os.path.join(temp_dir, "first.csv")
            second_path = os.path.join(temp_dir, "second.csv")
            write_csv(self.outcome.history, first_path)
            write_csv(repeated.history, second_path)
            with open(first_path, "rb") as first, open(second_path, "rb") as second:
                self.assertEqual(first.read(), second.read())



if __name__ == "__main__":
    unittest.main()
