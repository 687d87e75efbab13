"""The data re-uploading circuit family and its exact evaluation.

A circuit is ``depth`` layers deep; within a layer the features are
encoded in ascending index order. Each (layer, feature) block applies

    R_outer(theta_o)  R_middle(encoded angle)  R_closing(theta_c)

where the closing gate exists only for params_per_input >= 2, and the
encoded angle is a polynomial in the block's remaining parameters and
the feature value:

    ppi 1, 2:  x
    ppi 3:     theta * x
    ppi 4:     theta_a * x + theta_b
    ppi 5:     theta_a^2 * x + theta_b * x + theta_c

Parameters are stored flat, blocks ordered layer-major then feature,
``param_count = depth * n_features * ppi``. Within a block the order is
(outer, [encoding polynomial coefficients...], closing).

The hypothesis function is the exact Z expectation of the output state
(infinite-shot limit); gradients are exact via the parameter-shift rule
[h(phi+pi/2) - h(phi-pi/2)]/2 chained through the encoding polynomial.
All functions are pure; per-sample work may run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import cos, pi, sin
from typing import Sequence

import numpy as np

from qrulab.errors import LayoutError
from qrulab.qcore import AXES

# Trainable parameters feeding the middle (encoding) gate, per ppi.
_MIDDLE_PARAMS = {1: 0, 2: 0, 3: 1, 4: 2, 5: 3}

_HALF_PI = pi / 2.0


@dataclass(frozen=True)
class EncodingScheme:
    """Axis layout plus parameters-per-input of one encoding block."""

    outer_axis: str
    middle_axis: str
    closing_axis: str
    params_per_input: int
    triplet: bool

    def __post_init__(self):
        for ax in (self.outer_axis, self.middle_axis, self.closing_axis):
            if ax not in AXES:
                raise ValueError(f"unknown axis {ax!r}; expected one of {AXES}")
        if self.params_per_input not in _MIDDLE_PARAMS:
            raise ValueError(f"params_per_input must be 1..5, got {self.params_per_input}")
        axes = (self.outer_axis, self.middle_axis, self.closing_axis)
        if self.triplet:
            if len(set(axes)) != 3:
                raise ValueError(f"triplet layout requires three distinct axes, got {axes}")
        else:
            if self.outer_axis != self.closing_axis or self.outer_axis == self.middle_axis:
                raise ValueError(
                    f"sandwich layout requires outer = closing != middle, got {axes}"
                )

    @classmethod
    def from_axes(cls, axes: str, params_per_input: int) -> "EncodingScheme":
        """Build from a 3-letter axis string like 'xyx' (sandwich) or 'xyz' (triplet)."""
        axes = axes.lower()
        if len(axes) != 3:
            raise ValueError(f"axis string must have length 3, got {axes!r}")
        return cls(axes[0], axes[1], axes[2], params_per_input, len(set(axes)) == 3)

    @property
    def axes(self) -> str:
        return self.outer_axis + self.middle_axis + self.closing_axis

    @property
    def middle_param_count(self) -> int:
        return _MIDDLE_PARAMS[self.params_per_input]

    @property
    def has_closing(self) -> bool:
        # ppi 1 has no trainable closing gate.
        return self.params_per_input >= 2


@dataclass(frozen=True)
class CircuitSpec:
    """Depth (number of re-uploads), feature count, and encoding scheme."""

    depth: int
    n_features: int
    scheme: EncodingScheme

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if self.n_features < 1:
            raise ValueError(f"n_features must be >= 1, got {self.n_features}")


def param_count(spec: CircuitSpec) -> int:
    """Flat trainable-parameter count: depth * n_features * ppi."""
    return spec.depth * spec.n_features * spec.scheme.params_per_input


def encoded_angle(scheme: EncodingScheme, theta_slice: Sequence[float], x: float) -> float:
    """Middle-gate angle for one block given its encoding parameters."""
    need = scheme.middle_param_count
    if len(theta_slice) != need:
        raise LayoutError(
            f"encoding slice for ppi {scheme.params_per_input} needs {need} "
            f"parameters, got {len(theta_slice)}"
        )
    ppi = scheme.params_per_input
    if ppi <= 2:
        return float(x)
    if ppi == 3:
        return float(theta_slice[0] * x)
    if ppi == 4:
        return float(theta_slice[0] * x + theta_slice[1])
    return float(theta_slice[0] ** 2 * x + theta_slice[1] * x + theta_slice[2])


def _check_inputs(spec: CircuitSpec, params: Sequence[float], x: Sequence[float]):
    if len(params) != param_count(spec):
        raise LayoutError(
            f"parameter vector length {len(params)} != param_count {param_count(spec)}"
        )
    if len(x) != spec.n_features:
        raise LayoutError(f"feature vector length {len(x)} != n_features {spec.n_features}")


def _build_gates(spec, params, x):
    """Flatten the circuit into (axis, angle, deps) gate triples.

    deps is a tuple of (param_index, d(angle)/d(param)) pairs; gates with
    no trainable dependence (the raw-feature middle gates of ppi 1 and 2)
    carry an empty tuple.
    """
    scheme = spec.scheme
    ppi = scheme.params_per_input
    outer, middle, closing = scheme.outer_axis, scheme.middle_axis, scheme.closing_axis
    gates = []
    base = 0
    for _ in range(spec.depth):
        for j in range(spec.n_features):
            xj = x[j]
            gates.append((outer, params[base], ((base, 1.0),)))
            if ppi <= 2:
                gates.append((middle, xj, ()))
            elif ppi == 3:
                gates.append((middle, params[base + 1] * xj, ((base + 1, xj),)))
            elif ppi == 4:
                gates.append(
                    (
                        middle,
                        params[base + 1] * xj + params[base + 2],
                        ((base + 1, xj), (base + 2, 1.0)),
                    )
                )
            else:
                ta = params[base + 1]
                gates.append(
                    (
                        middle,
                        ta * ta * xj + params[base + 2] * xj + params[base + 3],
                        ((base + 1, 2.0 * ta * xj), (base + 2, xj), (base + 3, 1.0)),
                    )
                )
            if ppi >= 2:
                gates.append((closing, params[base + ppi - 1], ((base + ppi - 1, 1.0),)))
            base += ppi
    return gates


def _apply(axis, angle, a0, a1):
    # Scalar-complex gate application; the 2x2 problem size makes plain
    # Python complex arithmetic faster than array dispatch here.
    c = cos(0.5 * angle)
    s = sin(0.5 * angle)
    if axis == "x":
        return c * a0 - 1j * s * a1, c * a1 - 1j * s * a0
    if axis == "y":
        return c * a0 - s * a1, s * a0 + c * a1
    p = complex(c, -s)
    return p * a0, p.conjugate() * a1


def _gate_tuple(axis, angle):
    c = cos(0.5 * angle)
    s = sin(0.5 * angle)
    if axis == "x":
        return c, -1j * s, -1j * s, c
    if axis == "y":
        return c, -s, s, c
    return complex(c, -s), 0.0, 0.0, complex(c, s)


def _expectation(a0, a1):
    p0 = a0.real * a0.real + a0.imag * a0.imag
    p1 = a1.real * a1.real + a1.imag * a1.imag
    # Dividing by the total renormalizes away accumulated float drift.
    return (p0 - p1) / (p0 + p1)


def forward(spec: CircuitSpec, params: Sequence[float], x: Sequence[float]) -> float:
    """Hypothesis value h(x) = <0| U†(theta, x) Z U(theta, x) |0> in [-1, 1]."""
    _check_inputs(spec, params, x)
    a0, a1 = 1.0 + 0.0j, 0.0j
    for axis, angle, _ in _build_gates(spec, params, x):
        a0, a1 = _apply(axis, angle, a0, a1)
    return _expectation(a0, a1)


def output_state(spec: CircuitSpec, params: Sequence[float], x: Sequence[float]) -> np.ndarray:
    """The circuit's output state U(theta, x)|0> as a normalized length-2 vector."""
    _check_inputs(spec, params, x)
    a0, a1 = 1.0 + 0.0j, 0.0j
    for axis, angle, _ in _build_gates(spec, params, x):
        a0, a1 = _apply(axis, angle, a0, a1)
    v = np.array([a0, a1])
    return v / np.linalg.norm(v)


def gradient(spec: CircuitSpec, params: Sequence[float], x: Sequence[float]) -> np.ndarray:
    """Exact dh/dtheta for every trainable parameter.

    Parameter-shift per gate angle, made O(gates) overall by caching the
    prefix states and suffix operators so each shifted evaluation costs
    two 2x2 products instead of a full circuit pass.
    """
    return value_and_gradient(spec, params, x)[1]


def value_and_gradient(
    spec: CircuitSpec, params: Sequence[float], x: Sequence[float]
) -> tuple[float, np.ndarray]:
    """(h, dh/dtheta) in one pass; the forward states double as shift caches."""
    _check_inputs(spec, params, x)
    gates = _build_gates(spec, params, x)
    n = len(gates)

    prefix = [(1.0 + 0.0j, 0.0j)]
    a0, a1 = prefix[0]
    for axis, angle, _ in gates:
        a0, a1 = _apply(axis, angle, a0, a1)
        prefix.append((a0, a1))

    # suffix[k] = product of gates k+1 .. n-1 (identity for k = n-1).
    suffix = [None] * n
    m = (1.0 + 0.0j, 0.0j, 0.0j, 1.0 + 0.0j)
    for k in range(n - 1, -1, -1):
        suffix[k] = m
        axis, angle, _ = gates[k]
        g00, g01, g10, g11 = _gate_tuple(axis, angle)
        m00, m01, m10, m11 = m
        m = (
            m00 * g00 + m01 * g10,
            m00 * g01 + m01 * g11,
            m10 * g00 + m11 * g10,
            m10 * g01 + m11 * g11,
        )

    grad = np.zeros(len(params))
    for k, (axis, angle, deps) in enumerate(gates):
        if not deps:
            continue
        b0, b1 = prefix[k]
        m00, m01, m10, m11 = suffix[k]
        shifted = []
        for delta in (_HALF_PI, -_HALF_PI):
            v0, v1 = _apply(axis, angle + delta, b0, b1)
            w0 = m00 * v0 + m01 * v1
            w1 = m10 * v0 + m11 * v1
            shifted.append(_expectation(w0, w1))
        dh_dangle = 0.5 * (shifted[0] - shifted[1])
        for idx, chain in deps:
            grad[idx] += chain * dh_dangle
    return _expectation(*prefix[n]), grad


def predict_class(h: float, targets: Sequence[float]) -> int:
    """Index of the target nearest to h; ties break toward the lower index."""
    if len(targets) == 0:
        raise ValueError("targets must be nonempty")
    for i in range(1, len(targets)):
        if targets[i] <= targets[i - 1]:
            raise ValueError("targets must be strictly increasing")
    best, best_dist = 0, abs(h - targets[0])
    for i in range(1, len(targets)):
        d = abs(h - targets[i])
        if d < best_dist:
            best, best_dist = i, d
    return best


def evaluate(spec: CircuitSpec, params, dataset, targets: Sequence[float]) -> float:
    """Fraction of records whose predicted class equals the label."""
    records = dataset.records
    if len(records) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    hits = 0
    for rec in records:
        if predict_class(forward(spec, params, rec.features), targets) == rec.label:
            hits += 1
    return hits / len(records)
