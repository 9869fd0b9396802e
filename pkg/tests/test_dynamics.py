"""
Unit tests for chaindrive propagation
"""

import unittest

import numpy as np
from scipy.integrate import solve_ivp

import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'src')))

from chaindrive.exceptions import ConvergenceWarning, NumericalError, ShapeError
from chaindrive.modules.dynamics import (
    DrivenPropagator, EvolutionResult, TimeGrid, evolve_constant, evolve_driven, infidelity,
    step_average_field, stroboscopic_times, uniform_times
)
from chaindrive.modules.models import (
    build_static_hamiltonian, calibrate_drive, driven_hamiltonian, effective_hamiltonian
)
from chaindrive.modules.operators import (
    PAULI_MATRICES, DenseOperator, PauliString, PureState, basis_product_state, build_pauli_operator,
    drive_operator, expectation_value, sum_operators
)
from chaindrive.schemas import ChainModel, CouplingProfile, DriveSpec, PropagatorConfig


class TestTimeGrids(unittest.TestCase):
    """Test sample grids."""

    def test_stroboscopic_unit_period(self):
        grid = stroboscopic_times(2 * np.pi, 3.0)
        np.testing.assert_allclose(grid.samples, [0, 1, 2, 3])

    def test_stroboscopic_count(self):
        grid = stroboscopic_times(100.0, 1.0)
        self.assertEqual(len(grid), 16)
        self.assertAlmostEqual(grid.samples[1], 0.06283, places=5)

    def test_short_horizon(self):
        grid = stroboscopic_times(10.0, 0.5)
        np.testing.assert_array_equal(grid.samples, [0.0])

    def test_uniform(self):
        grid = uniform_times(2.0, 5)
        np.testing.assert_allclose(grid.samples, [0, 0.5, 1.0, 1.5, 2.0])
        self.assertEqual(grid.t_start, 0.0)
        self.assertEqual(grid.t_end, 2.0)

    def test_invalid_grids(self):
        with self.assertRaises(ValueError):
            TimeGrid(np.array([0.0, 1.0, 1.0]))
        with self.assertRaises(ValueError):
            TimeGrid(np.array([-0.1, 1.0]))
        with self.assertRaises(ShapeError):
            TimeGrid(np.array([]))


class TestConstantEvolution(unittest.TestCase):
    """Test exact propagation under time-independent Hamiltonians."""

    def test_zero_hamiltonian(self):
        psi0 = basis_product_state(2, "01", "Y")
        result = evolve_constant(DenseOperator(np.zeros((4, 4))), psi0, uniform_times(1.0, 4))
        for k in range(4):
            np.testing.assert_allclose(result.states[0, k], psi0.amplitudes, atol=1e-15)

    def test_single_spin_rotation(self):
        psi0 = PureState(np.array([1, 1]) / np.sqrt(2))
        z = DenseOperator(PAULI_MATRICES["Z"])
        result = evolve_constant(z, psi0, TimeGrid(np.array([0.0, np.pi / 2])))
        np.testing.assert_allclose(result.final_state().amplitudes, np.array([-1j, 1j]) / np.sqrt(2), atol=1e-14)

    def test_two_site_exchange(self):
        xy = sum_operators([
            build_pauli_operator(PauliString(2, {1: axis, 2: axis}, 0.5)) for axis in ("X", "Y")
        ])
        result = evolve_constant(xy, basis_product_state(2, "01"), TimeGrid(np.array([0.0, np.pi / 2])))
        self.assertAlmostEqual(abs(result.final_state().amplitudes[2]) ** 2, 1.0, places=12)

    def test_non_hermitian(self):
        with self.assertRaises(NumericalError):
            evolve_constant(DenseOperator(np.array([[0, 1], [0, 0]])), basis_product_state(1, "0"),
                            uniform_times(1.0, 3))

    def test_dimension_mismatch(self):
        with self.assertRaises(ShapeError):
            evolve_constant(DenseOperator(np.eye(4)), basis_product_state(1, "0"), uniform_times(1.0, 3))

    def test_energy_and_norm_conserved(self):
        m = ChainModel(n_sites=4, family="xy", jx=(1.0, 0.5, 2.0), jy=(0.3, 1.0, -0.7))
        H = build_static_hamiltonian(m)
        result = evolve_constant(H, basis_product_state(4, "0110", "Y"), uniform_times(5.0, 21))
        energies = [expectation_value(H, result.state(k)) for k in range(len(result.grid))]
        self.assertLess(np.ptp(energies), 1e-9)
        np.testing.assert_allclose(np.linalg.norm(result.states, axis=-1), 1.0, atol=1e-12)

    def test_result_accessors(self):
        result = evolve_constant(DenseOperator(np.zeros((8, 8))), basis_product_state(3, "011"), uniform_times(1.0, 3))
        self.assertEqual(result.n_trials, 1)
        self.assertEqual(result.n_sites, 3)
        self.assertEqual(result.dim, 8)
        rho = result.density_matrix(2)
        self.assertAlmostEqual(np.trace(rho.matrix).real, 1.0)
        np.testing.assert_array_equal(result.times, result.grid.samples)

    def test_result_shape_check(self):
        with self.assertRaises(ShapeError):
            EvolutionResult(grid=uniform_times(1.0, 3), states=np.zeros((1, 2, 4)))


class TestDrivenEvolution(unittest.TestCase):
    """Test the piecewise-constant driven propagator."""

    def setUp(self):
        self.ising = ChainModel(n_sites=2, family="ising", jx=(1.0,))
        self.free = ChainModel(n_sites=2, family="ising", jx=(0.0,))

    def test_step_average(self):
        d = DriveSpec(axis="Z", g=2.0, omega=3.0)
        t0, t1 = 0.2, 0.5
        self.assertAlmostEqual(step_average_field(d, t0, t1),
                               2.0 * (np.sin(3 * t1) - np.sin(3 * t0)) / (3 * (t1 - t0)), places=14)

    def test_zero_drive_matches_constant(self):
        d = DriveSpec(axis="Z", g=0.0, omega=10.0)
        psi0 = basis_product_state(2, "01")
        grid = uniform_times(3.0, 13)
        driven = evolve_driven(self.ising, d, psi0, grid)
        constant = evolve_constant(build_static_hamiltonian(self.ising), psi0, grid)
        for k in range(len(grid)):
            self.assertLess(infidelity(driven.states[0, k], constant.states[0, k]), 1e-8)

    def test_free_spins_follow_closed_form(self):
        # Without couplings each spin is rotated about z by g sin(wt)/w
        d = DriveSpec(axis="Z", g=3.0, omega=7.0)
        psi0 = basis_product_state(2, "01", "Y")
        grid = uniform_times(1.3, 9)
        result = evolve_driven(self.free, d, psi0, grid, PropagatorConfig(steps_per_period=16))
        z_sum = drive_operator(2, "Z").matrix.diagonal()
        for k, t in enumerate(grid.samples):
            theta = d.g * np.sin(d.omega * t) / d.omega
            expected = np.exp(-1j * theta * z_sum) * psi0.amplitudes
            np.testing.assert_allclose(result.states[0, k], expected, atol=1e-10)

    def test_single_spin_propagator(self):
        d = DriveSpec(axis="Z", g=1.5, omega=4.0)
        propagator = DrivenPropagator(np.zeros((2, 2)), PAULI_MATRICES["Z"], d, 32)
        psi0 = np.array([1, 1]) / np.sqrt(2)
        samples = np.array([0.0, 0.1, 0.77, 2.0])
        states = propagator.propagate(psi0, samples)
        for k, t in enumerate(samples):
            theta = d.g * np.sin(d.omega * t) / d.omega
            expected = np.array([np.exp(-1j * theta), np.exp(1j * theta)]) * psi0
            self.assertLess(infidelity(states[k], expected), 1e-8)

    def test_step_unitaries_cached_per_slot(self):
        d = DriveSpec(axis="Z", g=1.0, omega=2.0)
        propagator = DrivenPropagator(np.zeros((2, 2)), PAULI_MATRICES["Z"], d, 16)
        first = propagator.step_unitary(3)
        self.assertIs(propagator.step_unitary(3 + 16), first)

    def test_matches_reference_integrator(self):
        omega = 10.0
        d = DriveSpec(axis="Z", g=calibrate_drive(0.5, omega), omega=omega)
        psi0 = basis_product_state(2, "01")
        cfg = PropagatorConfig(steps_per_period=256, check_convergence=False)
        result = evolve_driven(self.ising, d, psi0, TimeGrid(np.array([0.0, 1.0])), cfg)

        def rhs(t, y):
            return -1j * (driven_hamiltonian(self.ising, d, t).matrix @ y)

        reference = solve_ivp(rhs, (0.0, 1.0), psi0.amplitudes.astype(complex), method="DOP853",
                              rtol=1e-10, atol=1e-12)
        self.assertLess(infidelity(result.states[0, -1], reference.y[:, -1]), 1e-6)

    def test_norm_preserved(self):
        d = DriveSpec(axis="Y", g=5.0, omega=20.0)
        m = ChainModel(n_sites=3, family="xy", jx=(1.0, 2.0), jy=(0.5, 0.5))
        result = evolve_driven(m, d, basis_product_state(3, "011"), uniform_times(2.0, 17))
        np.testing.assert_allclose(np.linalg.norm(result.states, axis=-1), 1.0, atol=1e-9)

    def test_meta(self):
        d = DriveSpec(axis="Z", g=calibrate_drive(0.0, 100.0), omega=100.0)
        result = evolve_driven(self.ising, d, basis_product_state(2, "01"), stroboscopic_times(100.0, 0.5))
        self.assertEqual(result.meta["mode"], "driven")
        self.assertEqual(result.meta["steps_per_period"], 64)
        self.assertTrue(result.meta["converged"])
        self.assertTrue(result.meta["high_frequency"])
        self.assertLess(abs(result.meta["bessel_weight"]), 1e-12)

    def test_unconverged_flagged(self):
        d = DriveSpec(axis="Z", g=3.0, omega=5.0)
        cfg = PropagatorConfig(steps_per_period=16, convergence_tol=1e-9)
        with self.assertWarns(ConvergenceWarning):
            result = evolve_driven(self.ising, d, basis_product_state(2, "01"), uniform_times(2.0, 5), cfg)
        self.assertFalse(result.meta["converged"])
        self.assertGreater(result.meta["convergence_infidelity"], 1e-9)

    def test_tracks_effective_chain(self):
        pst = CouplingProfile(kind="pst")
        m = ChainModel.from_profiles("ising", 5, pst)
        omega = 100 * max(m.jx)
        d = DriveSpec(axis="Z", g=calibrate_drive(0.0, omega), omega=omega)
        psi0 = basis_product_state(5, "01111")
        grid = stroboscopic_times(omega, 2.0)
        driven = evolve_driven(m, d, psi0, grid, PropagatorConfig(check_convergence=False))
        effective = evolve_constant(effective_hamiltonian(m, d), psi0, grid)
        for k in range(len(grid)):
            self.assertGreaterEqual(1 - infidelity(driven.states[0, k], effective.states[0, k]), 0.99)

    def test_dimension_mismatch(self):
        d = DriveSpec(axis="Z", g=1.0, omega=10.0)
        with self.assertRaises(ShapeError):
            evolve_driven(self.ising, d, basis_product_state(3, "011"), uniform_times(1.0, 3))


if __name__ == '__main__':
    unittest.main()
