"""Spectral, expressibility, and symmetry diagnostic tests.

The spectrum fitter is checked by exact recovery of synthesized
trigonometric polynomials, the depth/frequency link on unit-scaling
circuits, and the KL estimator against its closed-form fixed-state value.
"""

import math

import numpy as np
import pytest

from qrulab import analysis, qcore
from qrulab import circuit as qc


def make_spec(axes, ppi, depth, nf=1):
    return qc.CircuitSpec(depth, nf, qc.EncodingScheme.from_axes(axes, ppi))


def grid(n=201):
    return np.linspace(-math.pi, math.pi, n)


class TestCurve:
    def test_matches_forward_loop(self):
        spec = make_spec("xyx", 3, 2)
        params = np.array([0.3, 1.0, -0.4, 0.8, 1.3, 0.2])
        curve = analysis.hypothesis_curve(spec, params, (-math.pi, math.pi), 21)
        for x, h in zip(curve.xs, curve.hs):
            assert math.isclose(h, qc.forward(spec, params, [x]), abs_tol=1e-14)
        assert curve.xs[0] == -math.pi and curve.xs[-1] == math.pi

    def test_requires_single_feature(self):
        spec = make_spec("xyx", 3, 2, nf=2)
        with pytest.raises(ValueError):
            analysis.hypothesis_curve(spec, np.zeros(qc.param_count(spec)), (-1, 1), 5)


class TestSpectrumFit:
    def test_exact_recovery_of_synthesized_series(self):
        rng = np.random.default_rng(50)
        xs = grid(101)
        for max_freq in (1, 2, 4):
            a0 = rng.normal()
            cos_c = rng.normal(size=max_freq)
            sin_c = rng.normal(size=max_freq)
            hs = np.full_like(xs, a0)
            for w in range(1, max_freq + 1):
                hs = hs + cos_c[w - 1] * np.cos(w * xs) + sin_c[w - 1] * np.sin(w * xs)
            fit = analysis.spectrum_fit(analysis.CurveSample(xs, hs), max_freq)
            assert fit.frequencies == tuple(range(max_freq + 1))
            assert math.isclose(fit.cos_coeffs[0], a0, abs_tol=1e-10)
            np.testing.assert_allclose(fit.cos_coeffs[1:], cos_c, atol=1e-10)
            assert fit.sin_coeffs[0] == 0.0
            np.testing.assert_allclose(fit.sin_coeffs[1:], sin_c, atol=1e-10)
            assert fit.residual_rms < 1e-12

    def test_truncated_fit_leaves_residual(self):
        xs = grid(101)
        hs = np.cos(2 * xs)
        full = analysis.spectrum_fit(analysis.CurveSample(xs, hs), 2)
        short = analysis.spectrum_fit(analysis.CurveSample(xs, hs), 1)
        assert full.residual_rms < 1e-12
        assert short.residual_rms > 0.1

    def test_underdetermined_rejected(self):
        xs = grid(7)
        with pytest.raises(ValueError):
            analysis.spectrum_fit(analysis.CurveSample(xs, np.cos(xs)), 4)

    def test_partial_period_rejected(self):
        xs = np.linspace(-1.0, 1.0, 50)
        with pytest.raises(ValueError):
            analysis.spectrum_fit(analysis.CurveSample(xs, np.cos(xs)), 1)

    def test_depth_bounds_frequency_at_unit_scaling(self):
        # scaling parameters pinned to 1: depth L emits harmonics up to L
        rng = np.random.default_rng(51)
        for depth in (1, 2, 3):
            spec = make_spec("xyx", 3, depth)
            params = np.empty(qc.param_count(spec))
            params[0::3] = rng.uniform(-2, 2, depth)  # outer angles
            params[1::3] = 1.0                        # unit scaling
            params[2::3] = rng.uniform(-2, 2, depth)  # closing angles
            curve = analysis.hypothesis_curve(spec, params, (-math.pi, math.pi), 201)
            exact = analysis.spectrum_fit(curve, depth)
            if depth > 0:
                truncated = analysis.spectrum_fit(curve, depth - 1)
                assert truncated.residual_rms > 10 * max(exact.residual_rms, 1e-12)
            assert exact.residual_rms < 1e-8


class TestKlEstimator:
    def test_fixed_state_closed_form(self):
        # all mass in one bin: KL = ln(n_bins)
        fids = np.full(5000, 0.3)
        for bins in (10, 75):
            got = analysis.kl_vs_haar(fids, bins)
            assert math.isclose(got, math.log(bins), abs_tol=1e-9)

    def test_uniform_fidelities_near_zero(self):
        rng = np.random.default_rng(52)
        fids = rng.uniform(0, 1, 20000)
        assert analysis.kl_vs_haar(fids, 20) < 0.01

    def test_non_negative(self):
        rng = np.random.default_rng(53)
        for _ in range(5):
            fids = rng.beta(0.5, 0.5, 500)
            assert analysis.kl_vs_haar(fids, 30) >= 0.0

    def test_haar_pairs_have_low_kl(self):
        rng = np.random.default_rng(54)
        fids = [
            qcore.state_fidelity(qcore.haar_state(rng), qcore.haar_state(rng))
            for _ in range(4000)
        ]
        assert analysis.kl_vs_haar(fids, 75) < 0.1


class TestExpressibility:
    def test_seeded_determinism(self):
        spec = make_spec("xyx", 4, 2)
        a = analysis.expressibility_kl(spec, n_pairs=400, n_bins=30, seed=3)
        b = analysis.expressibility_kl(spec, n_pairs=400, n_bins=30, seed=3)
        assert a == b

    def test_deeper_offset_circuits_more_expressive(self):
        # offset encodings escape the fixed-output trap at x = 0
        shallow = analysis.expressibility_kl(make_spec("xyx", 4, 1), 2000, 50, seed=4)
        deep = analysis.expressibility_kl(make_spec("xyx", 4, 3), 2000, 50, seed=4)
        assert deep < shallow

    def test_low_order_sandwich_collapses_at_origin(self):
        # ppi <= 3 sandwich blocks reduce to a single-axis ensemble at x=0,
        # whose fidelity law is far from Haar regardless of depth
        kl = analysis.expressibility_kl(make_spec("xyx", 3, 4), 2000, 50, seed=5)
        assert kl > 0.1


class TestEvennessGap:
    def test_zero_for_even_circuit(self):
        rng = np.random.default_rng(55)
        spec = make_spec("zxz", 3, 3)
        params = rng.uniform(-2, 2, qc.param_count(spec))
        gap = analysis.evenness_gap(spec, params, (-math.pi, math.pi), 101)
        assert gap < 1e-12

    def test_positive_for_offset_circuit(self):
        rng = np.random.default_rng(56)
        spec = make_spec("xyx", 4, 2)
        params = rng.uniform(-2, 2, qc.param_count(spec))
        gap = analysis.evenness_gap(spec, params, (-math.pi, math.pi), 101)
        assert gap > 1e-3

    def test_asymmetric_interval_rejected(self):
        spec = make_spec("xyx", 3, 1)
        with pytest.raises(ValueError):
            analysis.evenness_gap(spec, np.zeros(3), (-1.0, 2.0), 11)
