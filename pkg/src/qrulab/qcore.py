"""Exact single-qubit state algebra.

Conventions used throughout the package:

* Rotation gates follow the half-angle convention
  ``R_a(phi) = exp(-i * phi * sigma_a / 2)`` for ``a`` in {x, y, z}.
* States are length-2 complex vectors ``(a0, a1)`` over the {|0>, |1>}
  basis with unit norm; unitaries are row-major 2x2 complex arrays.
* Global phase is ignored everywhere: all comparisons and observables
  (``<Z>``, fidelity) are phase-blind.

Everything here is a pure function over immutable values, so concurrent
use needs no coordination.
"""

from __future__ import annotations

import math

import numpy as np

AXES = ("x", "y", "z")

# Norm drift above this triggers renormalization after a gate application.
_RENORM_TOL = 1e-13
_UNITARY_TOL = 1e-12

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def state_zero() -> np.ndarray:
    """The |0> computational basis state."""
    return np.array([1.0 + 0.0j, 0.0j])


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """2x2 unitary for R_axis(angle) = exp(-i*angle*sigma/2).

    Raises ValueError for an unknown axis or a non-finite angle.
    """
    if axis not in AXES:
        raise ValueError(f"unknown rotation axis {axis!r}; expected one of {AXES}")
    if not math.isfinite(angle):
        raise ValueError(f"rotation angle must be finite, got {angle!r}")
    c = math.cos(angle / 2.0)
    s = math.sin(angle / 2.0)
    if axis == "x":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if axis == "y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.array([[c - 1j * s, 0.0], [0.0, c + 1j * s]])


def is_unitary(u: np.ndarray, tol: float = _UNITARY_TOL) -> bool:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        return False
    return bool(np.allclose(u.conj().T @ u, np.eye(2), atol=tol, rtol=0.0))


def _check_state(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.shape != (2,):
        raise ValueError(f"state must have shape (2,), got {state.shape}")
    norm = float(np.linalg.norm(state))
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"state norm {norm} is not 1 within tolerance")
    return state


def apply_gate(state: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Apply a 2x2 unitary to a state; renormalizes if float drift exceeds 1e-13."""
    state = _check_state(state)
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"gate must have shape (2, 2), got {u.shape}")
    out = u @ state
    norm = float(np.linalg.norm(out))
    if abs(norm - 1.0) > _RENORM_TOL:
        out = out / norm
    return out


def expectation_z(state: np.ndarray) -> float:
    """<Z> = |a0|^2 - |a1|^2, in [-1, 1]."""
    state = _check_state(state)
    return float(abs(state[0]) ** 2 - abs(state[1]) ** 2)


def state_fidelity(s1: np.ndarray, s2: np.ndarray) -> float:
    """|<s1|s2>|^2 for pure states; in [0, 1]."""
    s1 = _check_state(s1)
    s2 = _check_state(s2)
    return float(min(1.0, abs(np.vdot(s1, s2)) ** 2))


def haar_state(rng: int | np.random.Generator) -> np.ndarray:
    """Haar-uniform random state: two standard complex Gaussians, normalized.

    ``rng`` may be an integer seed (deterministic per seed) or a Generator,
    so callers sampling many states can share one stream.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return v / np.linalg.norm(v)


def bloch_rotation(u: np.ndarray) -> np.ndarray:
    """SO(3) action of a unitary on Bloch vectors: R_ij = Re tr(sigma_i U sigma_j U†)/2."""
    u = np.asarray(u, dtype=complex)
    r = np.empty((3, 3))
    udag = u.conj().T
    for i, ax_i in enumerate(AXES):
        left = _PAULI[ax_i] @ u
        for j, ax_j in enumerate(AXES):
            r[i, j] = 0.5 * np.trace(left @ _PAULI[ax_j] @ udag).real
    return r


def euler_zyx_decompose(u: np.ndarray) -> tuple[float, float, float]:
    """Angles (phi, theta, psi) with R_z(phi) R_y(theta) R_x(psi) = u up to global phase.

    theta lies in [-pi/2, pi/2] (the reachable middle-angle range for the
    Z*Y*X order); phi and psi lie in (-pi, pi]. Raises ValueError for a
    non-unitary input.
    """
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u):
        raise ValueError("euler_zyx_decompose requires a unitary 2x2 matrix")
    r = bloch_rotation(u)
    # Z*Y*X composition gives r[2,0] = -sin(theta), r[2,1] = cos(theta) sin(psi),
    # r[2,2] = cos(theta) cos(psi), r[0,0] = cos(phi) cos(theta),
    # r[1,0] = sin(phi) cos(theta).
    sin_theta = max(-1.0, min(1.0, -r[2, 0]))
    cos_theta = math.hypot(r[2, 1], r[2, 2])
    theta = math.atan2(sin_theta, cos_theta)
    if cos_theta > 1e-12:
        psi = math.atan2(r[2, 1], r[2, 2])
        phi = math.atan2(r[1, 0], r[0, 0])
    elif sin_theta > 0.0:
        # Gimbal lock at theta = +pi/2: only psi - phi is determined; pick psi = 0.
        psi = 0.0
        phi = -math.atan2(r[0, 1], r[0, 2])
    else:
        # theta = -pi/2: only psi + phi is determined.
        psi = 0.0
        phi = math.atan2(-r[0, 1], -r[0, 2])
    return phi, theta, psi


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Largest entrywise deviation between a and b after optimal global phase alignment."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    overlap = np.vdot(a.ravel(), b.ravel())
    if abs(overlap) < 1e-300:
        return float(np.max(np.abs(a - b)))
    phase = overlap / abs(overlap)
    return float(np.max(np.abs(a * phase - b)))
