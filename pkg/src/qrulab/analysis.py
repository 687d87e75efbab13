"""Circuit diagnostics: hypothesis curves, spectra, expressibility, parity.

The hypothesis function of a depth-L circuit is a generalized
trigonometric polynomial of the input; with unit scalings its frequency
content is the integer set {0..L}, which ``spectrum_fit`` recovers by
least squares. ``expressibility_kl`` scores how uniformly random
parameters cover the state space: the KL divergence between the sampled
state-fidelity histogram and the single-qubit Haar law (fidelities
uniform on [0, 1]). ``evenness_gap`` witnesses the parity constraint of
sandwich layouts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qrulab import circuit as qc
from qrulab.qcore import state_fidelity

PROBABILITY_FLOOR = 1e-12


@dataclass(frozen=True)
class CurveSample:
    """h values on a uniform, strictly increasing grid."""

    xs: np.ndarray
    hs: np.ndarray

    def __post_init__(self):
        if len(self.xs) != len(self.hs):
            raise ValueError("grid and values must have equal length")
        if np.any(np.diff(self.xs) <= 0):
            raise ValueError("grid must be strictly increasing")


@dataclass(frozen=True)
class SpectrumFit:
    """Trig-polynomial coefficients; index w of cos/sin arrays is frequency w.

    cos_coeffs[0] is the constant term, sin_coeffs[0] is always 0.
    """

    frequencies: tuple[int, ...]
    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray
    residual_rms: float


def hypothesis_curve(
    spec: qc.CircuitSpec,
    params,
    interval: tuple[float, float] = (-math.pi, math.pi),
    n_points: int = 101,
) -> CurveSample:
    """Sample h(x) on a uniform grid; single-feature circuits only."""
    if spec.n_features != 1:
        raise ValueError(f"hypothesis_curve needs n_features = 1, got {spec.n_features}")
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    lo, hi = interval
    if not lo < hi:
        raise ValueError(f"interval must be increasing, got {interval}")
    xs = np.linspace(lo, hi, n_points)
    hs = np.array([qc.forward(spec, params, (float(x),)) for x in xs])
    return CurveSample(xs, hs)


def spectrum_fit(curve: CurveSample, max_freq: int) -> SpectrumFit:
    """Least-squares fit h(x) ~ a0 + sum_w (c_w cos wx + s_w sin wx), w = 1..max_freq."""
    if max_freq < 0:
        raise ValueError(f"max_freq must be >= 0, got {max_freq}")
    n = len(curve.xs)
    if n < 2 * max_freq + 1:
        raise ValueError(
            f"underdetermined fit: {n} points for {2 * max_freq + 1} coefficients"
        )
    step = curve.xs[1] - curve.xs[0]
    span = curve.xs[-1] - curve.xs[0]
    if span + step < 2.0 * math.pi - 1e-9:
        raise ValueError("curve must span one full 2*pi period")
    columns = [np.ones(n)]
    for w in range(1, max_freq + 1):
        columns.append(np.cos(w * curve.xs))
        columns.append(np.sin(w * curve.xs))
    design = np.column_stack(columns)
    coef, *_ = np.linalg.lstsq(design, curve.hs, rcond=None)
    resid = design @ coef - curve.hs
    cos_coeffs = np.concatenate([[coef[0]], coef[1::2]])
    sin_coeffs = np.concatenate([[0.0], coef[2::2]])
    return SpectrumFit(
        frequencies=tuple(range(max_freq + 1)),
        cos_coeffs=cos_coeffs,
        sin_coeffs=sin_coeffs,
        residual_rms=float(np.sqrt(np.mean(resid**2))),
    )


def kl_vs_haar(fidelities, n_bins: int) -> float:
    """KL of the fidelity histogram against the single-qubit Haar law.

    For one qubit the Haar fidelity density is uniform on [0, 1], so the
    reference bin mass is 1/n_bins. Empty bins are floored at 1e-12.
    """
    if n_bins < 2:
        raise ValueError(f"n_bins must be >= 2, got {n_bins}")
    fidelities = np.asarray(fidelities, dtype=float)
    counts, _ = np.histogram(fidelities, bins=n_bins, range=(0.0, 1.0))
    p = np.maximum(counts / len(fidelities), PROBABILITY_FLOOR)
    q = 1.0 / n_bins
    return max(0.0, float(np.sum(p * np.log(p / q))))


def expressibility_kl(
    spec: qc.CircuitSpec, n_pairs: int = 5000, n_bins: int = 75, seed: int = 0
) -> float:
    """Expressibility of the parameterized ensemble at data input 0.

    Samples n_pairs parameter-vector pairs uniform over [0, 2*pi) per
    component, computes output-state fidelities, and returns the KL
    against the Haar fidelity law. Lower is more expressive.
    """
    if n_pairs < 100:
        raise ValueError(f"n_pairs must be >= 100, got {n_pairs}")
    rng = np.random.default_rng(seed)
    n_params = qc.param_count(spec)
    x = (0.0,) * spec.n_features
    fids = np.empty(n_pairs)
    for k in range(n_pairs):
        theta_a = rng.uniform(0.0, 2.0 * math.pi, n_params)
        theta_b = rng.uniform(0.0, 2.0 * math.pi, n_params)
        fids[k] = state_fidelity(
            qc.output_state(spec, theta_a, x), qc.output_state(spec, theta_b, x)
        )
    return kl_vs_haar(fids, n_bins)


def evenness_gap(
    spec: qc.CircuitSpec,
    params,
    interval: tuple[float, float] = (-math.pi, math.pi),
    n_points: int = 101,
) -> float:
    """max |h(x) - h(-x)| over the grid; zero witnesses an even hypothesis."""
    if spec.n_features != 1:
        raise ValueError(f"evenness_gap needs n_features = 1, got {spec.n_features}")
    lo, hi = interval
    if abs(lo + hi) > 1e-12:
        raise ValueError(f"interval must be symmetric around 0, got {interval}")
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    gap = 0.0
    for x in np.linspace(lo, hi, n_points):
        diff = abs(
            qc.forward(spec, params, (float(x),)) - qc.forward(spec, params, (float(-x),))
        )
        gap = max(gap, diff)
    return gap
