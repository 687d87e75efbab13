"""Measuring how much of the Bloch sphere a circuit family reaches.

Draw random parameter vectors, collect pairwise state fidelities, and
compare their histogram to the Haar (uniform) law with a KL divergence.
Zero means the family shadows Haar exactly; ln(n_bins) is the worst
case, a family stuck on a single state.
"""

import math

import numpy as np

from qrulab import analysis, qcore
from qrulab import circuit as qc

PAIRS = 1500
BINS = 40

print("=" * 70)
print("1. reference points")
print("=" * 70)

rng = np.random.default_rng(11)
haar_fids = np.array([
    qcore.state_fidelity(qcore.haar_state(rng), qcore.haar_state(rng))
    for _ in range(PAIRS)
])
print(f"Haar sample itself:     KL = {analysis.kl_vs_haar(haar_fids, BINS):.4f}"
      "  (sampling noise only)")
print(f"collapsed ensemble:     KL = {analysis.kl_vs_haar(np.full(PAIRS, 1.0), BINS):.4f}"
      f"  (= ln {BINS} = {math.log(BINS):.4f})")

print()
print("=" * 70)
print("2. circuit families at x = 0")
print("=" * 70)

print(f"{'axes':>5} {'ppi':>4} {'depth':>6} {'KL vs Haar':>11}")
for axes, ppi in (("xyx", 4), ("xyz", 4), ("xyx", 3)):
    for depth in (1, 3):
        spec = qc.CircuitSpec(depth, 1, qc.EncodingScheme.from_axes(axes, ppi))
        kl = analysis.expressibility_kl(spec, PAIRS, BINS, seed=0)
        print(f"{axes:>5} {ppi:>4} {depth:>6} {kl:>11.4f}")

print()
print("Notes: with an affine encoding (ppi 4) the offset angles act like free")
print("rotations, so even depth 1 spreads well and depth 3 approaches Haar.")
print("Scale-only encoding (ppi 3) evaluated at x = 0 freezes the middle gate")
print("of every block, collapsing the sandwich family onto one axis: the KL")
print("stays large no matter the depth. Expressibility depends on the")
print("encoding, not just the gate count.")

print()
print("=" * 70)
print("3. evenness gap, the other structural diagnostic")
print("=" * 70)

gap_rng = np.random.default_rng(1)
for axes, ppi in (("zxz", 3), ("xyz", 3), ("zxz", 4)):
    spec = qc.CircuitSpec(4, 1, qc.EncodingScheme.from_axes(axes, ppi))
    params = gap_rng.uniform(-2, 2, qc.param_count(spec))
    gap = analysis.evenness_gap(spec, params, (-math.pi, math.pi), 101)
    tag = "even (sign-blind)" if gap < 1e-9 else "sign-sensitive"
    print(f"axes={axes} ppi={ppi}: max |h(x) - h(-x)| = {gap:.3e}  -> {tag}")
