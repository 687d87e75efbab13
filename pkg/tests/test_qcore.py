"""Single-qubit primitive tests.

Rotation gates are checked against the matrix exponential, Bloch
rotations against expectation values, Euler angles by round-trip, and
Haar sampling by a chi-squared uniformity test on pair fidelities.
"""

import math

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.stats import chisquare

from qrulab import qcore

SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def rotation_oracle(axis, angle):
    # independent route: exp(-i * angle/2 * sigma)
    return expm(-0.5j * angle * SIGMA[axis])


def bloch_vector(state):
    return np.array([
        np.real(np.conj(state) @ (SIGMA[a] @ state)) for a in ("x", "y", "z")
    ])


class TestRotationMatrix:
    def test_matches_matrix_exponential(self):
        rng = np.random.default_rng(1)
        for _ in range(60):
            axis = ("x", "y", "z")[rng.integers(3)]
            angle = rng.uniform(-8, 8)
            np.testing.assert_allclose(
                qcore.rotation_matrix(axis, angle),
                rotation_oracle(axis, angle),
                atol=1e-14,
            )

    def test_unitary(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            u = qcore.rotation_matrix("y", rng.uniform(-10, 10))
            assert qcore.is_unitary(u)

    def test_same_axis_angles_add(self):
        a, b = 0.7, -1.9
        np.testing.assert_allclose(
            qcore.rotation_matrix("z", a) @ qcore.rotation_matrix("z", b),
            qcore.rotation_matrix("z", a + b),
            atol=1e-14,
        )

    def test_identity_at_zero(self):
        for axis in ("x", "y", "z"):
            np.testing.assert_allclose(
                qcore.rotation_matrix(axis, 0.0), np.eye(2), atol=0
            )

    def test_rejects_bad_axis(self):
        with pytest.raises(ValueError):
            qcore.rotation_matrix("q", 0.3)

    def test_rejects_non_finite_angle(self):
        with pytest.raises(ValueError):
            qcore.rotation_matrix("x", math.nan)


class TestStatesAndExpectation:
    def test_zero_state(self):
        np.testing.assert_array_equal(qcore.state_zero(), [1.0 + 0j, 0.0 + 0j])

    def test_expectation_z_on_ry_rotation(self):
        # Ry(t)|0> has <Z> = cos t
        for t in (-2.5, -0.3, 0.0, 1.1, 3.0):
            state = qcore.apply_gate(qcore.state_zero(), qcore.rotation_matrix("y", t))
            assert math.isclose(qcore.expectation_z(state), math.cos(t), abs_tol=1e-12)

    def test_apply_gate_renormalizes_drift(self):
        state = np.array([1.0 + 1e-11, 0.0], dtype=complex)
        out = qcore.apply_gate(state, np.eye(2, dtype=complex))
        assert math.isclose(float(np.linalg.norm(out)), 1.0, abs_tol=5e-16)

    def test_apply_gate_rejects_broken_state(self):
        with pytest.raises(ValueError):
            qcore.apply_gate(np.array([2.0, 0.0], dtype=complex), np.eye(2, dtype=complex))

    def test_fidelity_bounds_and_self(self):
        rng = np.random.default_rng(3)
        for _ in range(40):
            s1 = qcore.haar_state(rng)
            s2 = qcore.haar_state(rng)
            f = qcore.state_fidelity(s1, s2)
            assert 0.0 <= f <= 1.0
            assert math.isclose(qcore.state_fidelity(s1, s1), 1.0, abs_tol=1e-12)

    def test_fidelity_orthogonal(self):
        s1 = np.array([1, 0], dtype=complex)
        s2 = np.array([0, 1], dtype=complex)
        assert qcore.state_fidelity(s1, s2) == 0.0

    def test_fidelity_ignores_global_phase(self):
        s = qcore.haar_state(7)
        assert math.isclose(
            qcore.state_fidelity(s, np.exp(0.4j) * s), 1.0, abs_tol=1e-12
        )


class TestHaarSampling:
    def test_seeded_and_normalized(self):
        s1 = qcore.haar_state(11)
        s2 = qcore.haar_state(11)
        np.testing.assert_array_equal(s1, s2)
        assert math.isclose(float(np.linalg.norm(s1)), 1.0, abs_tol=1e-12)

    def test_pair_fidelity_uniform(self):
        # single-qubit Haar pairs: F ~ Uniform(0,1); chi-squared at alpha=0.01
        rng = np.random.default_rng(5)
        fids = [
            qcore.state_fidelity(qcore.haar_state(rng), qcore.haar_state(rng))
            for _ in range(4000)
        ]
        counts, _ = np.histogram(fids, bins=20, range=(0.0, 1.0))
        assert chisquare(counts).pvalue > 0.01


class TestBlochRotation:
    def test_orthogonal_with_unit_determinant(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            u = rotation_oracle("x", rng.uniform(-6, 6)) @ rotation_oracle(
                "z", rng.uniform(-6, 6)
            )
            r = qcore.bloch_rotation(u)
            np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)
            assert math.isclose(float(np.linalg.det(r)), 1.0, abs_tol=1e-12)

    def test_consistent_with_state_action(self):
        # defining property: bloch(U psi) = R @ bloch(psi)
        rng = np.random.default_rng(7)
        for _ in range(25):
            u = rotation_oracle("y", rng.uniform(-6, 6)) @ rotation_oracle(
                "x", rng.uniform(-6, 6)
            )
            psi = qcore.haar_state(rng)
            np.testing.assert_allclose(
                bloch_vector(u @ psi),
                qcore.bloch_rotation(u) @ bloch_vector(psi),
                atol=1e-12,
            )


def random_unitary(rng):
    return (
        rotation_oracle("z", rng.uniform(-2 * math.pi, 2 * math.pi))
        @ rotation_oracle("y", rng.uniform(-2 * math.pi, 2 * math.pi))
        @ rotation_oracle("x", rng.uniform(-2 * math.pi, 2 * math.pi))
    )


class TestEulerDecomposition:
    def test_round_trip_random(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            u = random_unitary(rng)
            phi, theta, psi = qcore.euler_zyx_decompose(u)
            rebuilt = (
                qcore.rotation_matrix("z", phi)
                @ qcore.rotation_matrix("y", theta)
                @ qcore.rotation_matrix("x", psi)
            )
            assert qcore.phase_distance(u, rebuilt) < 1e-10

    def test_angle_ranges(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            phi, theta, psi = qcore.euler_zyx_decompose(random_unitary(rng))
            assert -math.pi <= psi <= math.pi
            assert -math.pi / 2 <= theta <= math.pi / 2
            assert -math.pi <= phi <= math.pi

    @pytest.mark.parametrize("sign", [1.0, -1.0])
    def test_gimbal_lock(self, sign):
        # middle angle at +-pi/2 collapses the outer axes; round-trip must hold
        rng = np.random.default_rng(10)
        for _ in range(20):
            u = (
                rotation_oracle("z", rng.uniform(-3, 3))
                @ rotation_oracle("y", sign * math.pi / 2)
                @ rotation_oracle("z", rng.uniform(-3, 3))
            )
            phi, theta, psi = qcore.euler_zyx_decompose(u)
            rebuilt = (
                qcore.rotation_matrix("z", phi)
                @ qcore.rotation_matrix("y", theta)
                @ qcore.rotation_matrix("x", psi)
            )
            assert qcore.phase_distance(u, rebuilt) < 1e-10

    def test_phase_distance_blind_to_global_phase(self):
        u = random_unitary(np.random.default_rng(11))
        assert qcore.phase_distance(u, np.exp(1.3j) * u) < 1e-12
        assert qcore.phase_distance(u, rotation_oracle("x", 0.5) @ u) > 1e-3
