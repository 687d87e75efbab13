"""End-to-end training on the synthetic three-class benchmark.

Generates the calorimeter-style dataset, normalizes features into
[-pi, pi], splits train/test, and fits a depth-2 circuit with Adam.
Scaled down from the full recipe (fewer epochs, larger batches) so the
demo finishes in a few seconds.
"""

import math

import numpy as np

from qrulab import dataio, training
from qrulab import circuit as qc

print("=" * 70)
print("1. data")
print("=" * 70)

ds = dataio.generate_synthetic(dataio.SynthConfig(n_per_class=150), seed=42)
X = ds.features_array()
print(f"{len(ds)} records, features: {dataio.CSV_HEADER[1:]}")
print("per-feature range:", np.round(X.min(axis=0), 1), "to", np.round(X.max(axis=0), 1))

train_raw, test_raw = dataio.split_shuffle(ds, ratio=0.8, seed=0)
train = dataio.normalize(train_raw, -math.pi, math.pi)
test = dataio.apply_normalization(test_raw, train.normalization)
print(f"split: {len(train)} train / {len(test)} test")
print(f"normalized into [{train.normalization.lo:+.3f}, {train.normalization.hi:+.3f}]"
      " using train-set extrema only")

print()
print("=" * 70)
print("2. model and recipe")
print("=" * 70)

spec = qc.CircuitSpec(2, 3, qc.EncodingScheme.from_axes("xyx", 3))
cfg = training.TrainConfig(
    spec=spec,
    epochs=8,
    batch_size=8,
    lr=5e-3,
    optimizer=training.OptimizerKind("adam"),
    loss=training.L2,
    seed=0,
)
print(f"depth {spec.depth}, {qc.param_count(spec)} parameters, "
      f"targets {training.default_targets(3)}")
print(f"adam lr={cfg.lr}, batch {cfg.batch_size}, {cfg.epochs} epochs")

print()
print("=" * 70)
print("3. fit")
print("=" * 70)

report = training.fit(cfg, train, test)
print(f"{'epoch':>5} {'train loss':>11} {'test loss':>10} {'train acc':>10} {'test acc':>9}")
for e in range(cfg.epochs):
    print(f"{e:>5} {report.train_loss[e]:>11.4f} {report.test_loss[e]:>10.4f}"
          f" {report.train_acc[e]:>10.4f} {report.test_acc[e]:>9.4f}")

print()
print(f"trainability (area under the train-loss curve): {report.trainability:.4f}")
print("lower area = faster descent; compare recipes with the same epoch count")
print(f"wall time: {report.wall_time:.1f}s")

# The prediction rule: h(x) is compared against one target per class
# and the nearest target wins.
targets = training.default_targets(3)
hits = sum(
    qc.predict_class(qc.forward(spec, report.final_params, r.features), targets)
    == r.label
    for r in test.records
)
print(f"hand recount of test accuracy: {hits}/{len(test)} = {hits / len(test):.4f}"
      f" (reported {report.test_acc[-1]:.4f})")
