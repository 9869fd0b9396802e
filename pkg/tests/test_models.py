"""
Unit tests for chaindrive chain models, drive calibration and effective Hamiltonians
"""

import unittest
from functools import reduce

import numpy as np
from scipy.linalg import expm
from pydantic import ValidationError

import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'src')))

from chaindrive.exceptions import CalibrationError, ModelError, UnsupportedTransform
from chaindrive.modules.models import (
    J0_MIN, J0_MIN_ARG, bessel_j0, bessel_j0_zero, bessel_weight, build_static_hamiltonian,
    calibrate_drive, control_frame_unitary, drive_value, driven_hamiltonian, effective_hamiltonian,
    frame_averaged_hamiltonian, is_high_frequency, max_coupling, supports_effective
)
from chaindrive.modules.operators import PAULI_MATRICES, PauliString, build_pauli_operator, sum_operators
from chaindrive.schemas import ChainModel, CouplingProfile, DriveSpec

X0 = 2.404825557695773


def bond_sum(n_sites, bonds):
    """Sum of c * sigma_a^i sigma_a^j over (i, j, axis, c)."""
    return sum_operators([
        build_pauli_operator(PauliString(n_sites, {i: axis, j: axis}, c)) for i, j, axis, c in bonds
    ]).matrix


def calibrated_drive(axis, target_A, omega=100.0):
    return DriveSpec(axis=axis, g=calibrate_drive(target_A, omega), omega=omega)


class TestStaticHamiltonians(unittest.TestCase):
    """Test the undriven chain families."""

    def test_ising_two_sites(self):
        m = ChainModel(n_sites=2, family="ising", jx=(1.0,))
        np.testing.assert_array_equal(build_static_hamiltonian(m).matrix, bond_sum(2, [(1, 2, "X", 1.0)]))

    def test_xy_chain(self):
        m = ChainModel(n_sites=3, family="xy", jx=(1.0, 2.0), jy=(0.5, -1.0))
        expected = bond_sum(3, [(1, 2, "X", 1.0), (2, 3, "X", 2.0), (1, 2, "Y", 0.5), (2, 3, "Y", -1.0)])
        np.testing.assert_allclose(build_static_hamiltonian(m).matrix, expected)

    def test_xy_gamma_one_is_doubled_ising(self):
        gamma_chain = ChainModel(n_sites=4, family="xy_gamma", jx=(1.0, 0.5, 2.0), gamma=1.0)
        ising = ChainModel(n_sites=4, family="ising", jx=(2.0, 1.0, 4.0))
        np.testing.assert_allclose(build_static_hamiltonian(gamma_chain).matrix,
                                   build_static_hamiltonian(ising).matrix)

    def test_nnn_coefficient(self):
        m = ChainModel(n_sites=3, family="ising_nnn", jx=(1.0, 1.0), l_nnn=(1.0,))
        nearest = bond_sum(3, [(1, 2, "X", 1.0), (2, 3, "X", 1.0)])
        remainder = build_static_hamiltonian(m).matrix - nearest
        np.testing.assert_allclose(remainder, bond_sum(3, [(1, 3, "X", 1.0 / 3.0)]), atol=1e-15)

    def test_hermitian(self):
        models = [
            ChainModel(n_sites=4, family="ising", jx=(1.0, 2.0, 3.0)),
            ChainModel(n_sites=4, family="xy", jx=(1.0, 2.0, 3.0), jy=(0.1, 0.2, 0.3)),
            ChainModel(n_sites=4, family="xy_gamma", jx=(1.0, 1.0, 1.0), gamma=0.3),
            ChainModel(n_sites=4, family="ising_nnn", jx=(1.0, 1.0, 1.0), l_nnn=(1.0, 2.0)),
        ]
        for m in models:
            self.assertTrue(build_static_hamiltonian(m).is_hermitian(1e-12), m.family)

    def test_array_length_mismatch(self):
        with self.assertRaises(ModelError):
            build_static_hamiltonian(ChainModel(n_sites=3, family="ising", jx=(1.0,)))
        with self.assertRaises(ModelError):
            build_static_hamiltonian(ChainModel(n_sites=3, family="xy", jx=(1.0, 1.0), jy=(1.0,)))
        with self.assertRaises(ModelError):
            build_static_hamiltonian(ChainModel(n_sites=4, family="ising_nnn", jx=(1.0,) * 3, l_nnn=(1.0,)))

    def test_unused_arrays_rejected(self):
        with self.assertRaises(ModelError):
            build_static_hamiltonian(ChainModel(n_sites=2, family="ising", jx=(1.0,), jy=(1.0,)))
        with self.assertRaises(ModelError):
            build_static_hamiltonian(ChainModel(n_sites=3, family="xy", jx=(1.0, 1.0), jy=(1.0, 1.0), gamma=0.5))

    def test_chain_size_bounds(self):
        with self.assertRaises(ValidationError):
            ChainModel(n_sites=1, family="ising", jx=())

    def test_pst_profile(self):
        couplings = CouplingProfile(kind="pst").expand(7, 6)
        np.testing.assert_allclose(couplings, [np.sqrt(i * (7 - i)) for i in range(1, 7)])
        self.assertEqual(CouplingProfile(kind="uniform", value=2.0).expand(4, 3), (2.0, 2.0, 2.0))


class TestDrive(unittest.TestCase):
    """Test the drive field and the driven Hamiltonian."""

    def test_drive_value(self):
        d = DriveSpec(axis="z", g=1.0, omega=2 * np.pi)
        self.assertEqual(drive_value(d, 0.0), 1.0)
        self.assertAlmostEqual(drive_value(d, 0.25), 0.0, places=12)
        strong = DriveSpec(axis="Z", g=100 / (4 * 2.4048), omega=100.0)
        self.assertAlmostEqual(drive_value(strong, 0.0), 10.396, places=3)

    def test_axis_normalized(self):
        self.assertEqual(DriveSpec(axis="y", g=1.0, omega=1.0).axis, "Y")
        with self.assertRaises(ValidationError):
            DriveSpec(axis="z", g=1.0, omega=0.0)

    def test_driven_hamiltonian_at_zero(self):
        m = ChainModel(n_sites=2, family="ising", jx=(1.0,))
        d = DriveSpec(axis="Z", g=0.7, omega=3.0)
        z_sum = sum_operators([build_pauli_operator(PauliString(2, {s: "Z"})) for s in (1, 2)]).matrix
        expected = bond_sum(2, [(1, 2, "X", 1.0)]) + 0.7 * z_sum
        np.testing.assert_allclose(driven_hamiltonian(m, d, 0.0).matrix, expected)

    def test_driven_hamiltonian_at_node(self):
        m = ChainModel(n_sites=3, family="ising_nnn", jx=(1.0, 1.0), l_nnn=(1.0,))
        d = DriveSpec(axis="Z", g=5.0, omega=2.0)
        H = driven_hamiltonian(m, d, np.pi / 4)
        np.testing.assert_allclose(H.matrix, build_static_hamiltonian(m).matrix, atol=1e-14)


class TestBessel(unittest.TestCase):
    """Test Bessel evaluation and drive calibration."""

    def test_bessel_values(self):
        self.assertEqual(bessel_j0(0.0), 1.0)
        self.assertLess(abs(bessel_j0(2.404826)), 1e-6)
        self.assertAlmostEqual(bessel_j0(3.831706), -0.402759, delta=1e-6)
        self.assertAlmostEqual(J0_MIN, -0.402759, delta=1e-6)
        self.assertAlmostEqual(J0_MIN_ARG, 3.831706, places=6)

    def test_zeros(self):
        self.assertAlmostEqual(bessel_j0_zero(1), X0, places=12)
        self.assertAlmostEqual(bessel_j0_zero(2), 5.520078110286311, places=12)
        with self.assertRaises(ValueError):
            bessel_j0_zero(0)

    def test_calibration_examples(self):
        self.assertEqual(calibrate_drive(1.0, 37.0), 0.0)
        self.assertAlmostEqual(calibrate_drive(0.0, 100.0), 60.1206, delta=1e-4)
        g = calibrate_drive(0.5, 40.0)
        self.assertAlmostEqual(g / 10.0, 1.5211, delta=1e-4)

    def test_calibration_round_trip(self):
        for target in (0.999, 0.5, 0.1, 0.0, -0.2, -0.4, J0_MIN):
            omega = 25.0
            g = calibrate_drive(target, omega)
            self.assertGreaterEqual(g, 0.0)
            self.assertLessEqual(abs(bessel_j0(4 * g / omega) - target), 1e-10, target)
            self.assertLessEqual(4 * g / omega, J0_MIN_ARG + 1e-12)

    def test_calibration_out_of_range(self):
        with self.assertRaises(CalibrationError):
            calibrate_drive(1.01, 10.0)
        with self.assertRaises(CalibrationError):
            calibrate_drive(-0.5, 10.0)
        with self.assertRaises(CalibrationError):
            calibrate_drive(0.5, 0.0)

    def test_bessel_weight(self):
        d = calibrated_drive("Z", 0.3)
        self.assertAlmostEqual(bessel_weight(d), 0.3, places=10)


class TestEffectiveHamiltonians(unittest.TestCase):
    """Test the rotating-frame effective chains."""

    def test_no_drive_recovers_ising(self):
        m = ChainModel(n_sites=3, family="ising", jx=(1.0, 2.0))
        d = DriveSpec(axis="Z", g=0.0, omega=50.0)
        np.testing.assert_allclose(effective_hamiltonian(m, d).matrix, build_static_hamiltonian(m).matrix)

    def test_ising_at_zero_weight_is_isotropic_xy(self):
        m = ChainModel(n_sites=3, family="ising", jx=(1.0, 2.0))
        expected = bond_sum(3, [(1, 2, "X", 0.5), (1, 2, "Y", 0.5), (2, 3, "X", 1.0), (2, 3, "Y", 1.0)])
        np.testing.assert_allclose(effective_hamiltonian(m, calibrated_drive("Z", 0.0)).matrix, expected, atol=1e-14)

    def test_xxx_chain(self):
        m = ChainModel(n_sites=3, family="xy", jx=(2.0, 2.0), jy=(1.0, 1.0))
        bonds = [(i, i + 1, axis, 1.0) for i in (1, 2) for axis in "XYZ"]
        np.testing.assert_allclose(effective_hamiltonian(m, calibrated_drive("Y", 0.0)).matrix,
                                   bond_sum(3, bonds), atol=1e-14)

    def test_rotated_xxz_chain(self):
        m = ChainModel(n_sites=3, family="xy", jx=(1.0, 1.0), jy=(1.0, 1.0))
        bonds = [(i, i + 1, axis, c) for i in (1, 2) for axis, c in (("X", 0.5), ("Z", 0.5), ("Y", 1.0))]
        np.testing.assert_allclose(effective_hamiltonian(m, calibrated_drive("Y", 0.0)).matrix,
                                   bond_sum(3, bonds), atol=1e-14)

    def test_isotropic_xy_unchanged_by_z_drive(self):
        m = ChainModel(n_sites=4, family="xy", jx=(1.0, 2.0, 1.5), jy=(1.0, 2.0, 1.5))
        for target in (0.0, 0.4, -0.3):
            np.testing.assert_allclose(effective_hamiltonian(m, calibrated_drive("Z", target)).matrix,
                                       build_static_hamiltonian(m).matrix, atol=1e-13)

    def test_gamma_one_matches_doubled_ising_up_to_rotation(self):
        gamma_chain = ChainModel(n_sites=3, family="xy_gamma", jx=(1.0, 0.5), gamma=1.0)
        ising = ChainModel(n_sites=3, family="ising", jx=(2.0, 1.0))
        A = 0.35
        h_gamma = effective_hamiltonian(gamma_chain, calibrated_drive("Y", A)).matrix
        h_ising = effective_hamiltonian(ising, calibrated_drive("Z", A)).matrix
        # exp(-i pi/4 X) on every site exchanges ZZ and YY bonds
        single = expm(-1j * np.pi / 4 * PAULI_MATRICES["X"])
        rotation = reduce(np.kron, [single] * 3)
        np.testing.assert_allclose(rotation.conj().T @ h_gamma @ rotation, h_ising, atol=1e-12)

    def test_nnn_terms(self):
        m = ChainModel(n_sites=3, family="ising_nnn", jx=(1.0, 1.0), l_nnn=(3.0,))
        expected = bond_sum(3, [
            (1, 2, "X", 0.5), (1, 2, "Y", 0.5), (2, 3, "X", 0.5), (2, 3, "Y", 0.5),
            (1, 3, "X", 0.5), (1, 3, "Y", 0.5),
        ])
        np.testing.assert_allclose(effective_hamiltonian(m, calibrated_drive("Z", 0.0)).matrix, expected, atol=1e-14)

    def test_unsupported_pairs(self):
        m = ChainModel(n_sites=2, family="ising", jx=(1.0,))
        with self.assertRaises(UnsupportedTransform):
            effective_hamiltonian(m, DriveSpec(axis="Y", g=1.0, omega=10.0))
        self.assertFalse(supports_effective("xy_gamma", "z"))
        self.assertTrue(supports_effective("xy", "y"))

    def test_matches_frame_average(self):
        cases = [
            (ChainModel(n_sites=3, family="ising", jx=(1.0, 0.7)), "Z"),
            (ChainModel(n_sites=3, family="xy", jx=(1.0, 0.7), jy=(0.3, -0.4)), "Z"),
            (ChainModel(n_sites=3, family="xy", jx=(2.0, 1.0), jy=(1.0, 0.5)), "Y"),
            (ChainModel(n_sites=3, family="xy_gamma", jx=(1.0, 1.0), gamma=0.4), "Y"),
            (ChainModel(n_sites=4, family="ising_nnn", jx=(1.0, 1.0, 1.0), l_nnn=(1.0, 2.0)), "Z"),
        ]
        for m, axis in cases:
            for target in (0.0, 0.6):
                d = calibrated_drive(axis, target, omega=30.0)
                averaged = frame_averaged_hamiltonian(m, d).matrix
                effective = effective_hamiltonian(m, d).matrix
                scale = np.linalg.norm(build_static_hamiltonian(m).matrix, 2)
                self.assertLess(np.linalg.norm(averaged - effective, 2), 1e-8 * scale, (m.family, axis, target))


class TestControlFrame(unittest.TestCase):
    """Test the control-field frame unitary."""

    def test_identity_at_period_boundaries(self):
        d = DriveSpec(axis="Z", g=3.0, omega=7.0)
        np.testing.assert_allclose(control_frame_unitary(d, 2, 0.0).matrix, np.eye(4))
        np.testing.assert_allclose(control_frame_unitary(d, 2, d.period).matrix, np.eye(4), atol=1e-12)

    def test_single_site_rotation(self):
        d = DriveSpec(axis="Z", g=np.pi / 4, omega=1.0)
        u = control_frame_unitary(d, 1, np.pi / 2).matrix
        np.testing.assert_allclose(u, np.diag([np.exp(-1j * np.pi / 4), np.exp(1j * np.pi / 4)]), atol=1e-15)

    def test_matches_matrix_exponential(self):
        d = DriveSpec(axis="Y", g=2.3, omega=5.0)
        t = 0.37
        theta = d.g * np.sin(d.omega * t) / d.omega
        y_sum = sum_operators([build_pauli_operator(PauliString(3, {s: "Y"})) for s in (1, 2, 3)]).matrix
        np.testing.assert_allclose(control_frame_unitary(d, 3, t).matrix, expm(-1j * theta * y_sum), atol=1e-12)

    def test_raising_operator_phase(self):
        d = DriveSpec(axis="Z", g=1.7, omega=4.0)
        sigma_plus = PAULI_MATRICES["X"] + 1j * PAULI_MATRICES["Y"]
        for t in (0.1, 0.5, 1.3):
            u = control_frame_unitary(d, 2, t).matrix
            for site in (1, 2):
                factors = [sigma_plus if s == site else np.eye(2) for s in (1, 2)]
                op = np.kron(*factors)
                phase = np.exp(2j * d.g * np.sin(d.omega * t) / d.omega)
                np.testing.assert_allclose(u.conj().T @ op @ u, op * phase, atol=1e-10)


class TestHighFrequency(unittest.TestCase):
    """Test the high-frequency advisory."""

    def test_max_coupling(self):
        self.assertEqual(max_coupling(ChainModel(n_sites=3, family="xy", jx=(2.0, 1.0), jy=(1.0, -3.0))), 3.0)
        self.assertEqual(max_coupling(ChainModel(n_sites=2, family="xy_gamma", jx=(2.0,), gamma=0.5)), 3.0)

    def test_advisory(self):
        m = ChainModel(n_sites=2, family="ising", jx=(1.0,))
        self.assertTrue(is_high_frequency(m, DriveSpec(axis="Z", g=1.0, omega=100.0)))
        with self.assertLogs("chaindrive", level="WARNING"):
            self.assertFalse(is_high_frequency(m, DriveSpec(axis="Z", g=1.0, omega=5.0)))


if __name__ == '__main__':
    unittest.main()
