"""Calorimeter-feature dataset ingestion, normalization, splitting, synthesis.

Records carry three detector features: total ECAL deposited energy,
shower length (layer count), and the standard deviation of HCAL energy
deposits. Labels: 0 = electron, 1 = muon, 2 = pion.

The only on-disk format is CSV, UTF-8, header exactly
``label,ecal_energy,shower_length,hcal_std``, one record per line;
written reals use 17 significant digits so round-trips are exact.
Datasets are immutable; every operation is pure given its seed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from qrulab.errors import DataError, StateError

CSV_HEADER = ("label", "ecal_energy", "shower_length", "hcal_std")

# Default synthetic class means (ecal_energy, shower_length, hcal_std):
# electron = high ECAL energy, muon = long shower, pion = high HCAL
# spread. Each pair of classes sits at the extremes of exactly one
# feature, so no class blob is the mirror image of another through the
# center of the feature cube: classifiers whose output is even in the
# normalized features (the low-order sandwich circuits on a symmetric
# interval) lose nothing to that symmetry, while no single linear cut
# orders all three classes.
DEFAULT_CLASS_MEANS = (
    (80.0, 38.0, 5.0),
    (20.0, 65.0, 10.0),
    (40.0, 10.0, 45.0),
)
DEFAULT_SPREAD = 4.0
DEFAULT_OVERLAP = 0.25


@dataclass(frozen=True)
class Record:
    label: int
    features: tuple[float, ...]


@dataclass(frozen=True)
class Normalization:
    """Per-feature affine min-max transform onto [lo, hi]."""

    lo: float
    hi: float
    mins: tuple[float, ...]
    maxs: tuple[float, ...]


@dataclass(frozen=True)
class Dataset:
    records: tuple[Record, ...]
    normalization: Normalization | None = None

    def __len__(self) -> int:
        return len(self.records)

    def features_array(self) -> np.ndarray:
        return np.array([r.features for r in self.records], dtype=float)

    def labels_array(self) -> np.ndarray:
        return np.array([r.label for r in self.records], dtype=int)


@dataclass(frozen=True)
class SynthConfig:
    n_per_class: int = 500
    class_means: tuple[tuple[float, float, float], ...] = DEFAULT_CLASS_MEANS
    spread: float = DEFAULT_SPREAD
    overlap: float = DEFAULT_OVERLAP

    def __post_init__(self):
        if self.n_per_class < 1:
            raise ValueError(f"n_per_class must be >= 1, got {self.n_per_class}")
        if not self.spread > 0:
            raise ValueError(f"spread must be > 0, got {self.spread}")
        if self.overlap < 0:
            raise ValueError(f"overlap must be >= 0, got {self.overlap}")


def load_records(path, n_classes: int = 3) -> Dataset:
    """Parse a feature CSV; row order preserved, normalization unset.

    Raises DataError (with the offending file line) for an unreadable
    file, bad header, wrong column count, non-numeric cells, or
    out-of-range labels.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError("empty file, expected header " + ",".join(CSV_HEADER), row=1)
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise DataError(
                f"bad header {','.join(header)!r}, expected {','.join(CSV_HEADER)}", row=1
            )
        records = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(CSV_HEADER):
                raise DataError(
                    f"expected {len(CSV_HEADER)} columns, got {len(row)}", row=line_no
                )
            try:
                label = int(row[0])
            except ValueError:
                raise DataError(f"non-integer label {row[0]!r}", row=line_no)
            if not 0 <= label < n_classes:
                raise DataError(
                    f"label {label} outside 0..{n_classes - 1}", row=line_no
                )
            try:
                features = tuple(float(cell) for cell in row[1:])
            except ValueError:
                raise DataError(f"non-numeric feature in {row[1:]!r}", row=line_no)
            if not all(np.isfinite(features)):
                raise DataError(f"non-finite feature in {row[1:]!r}", row=line_no)
            records.append(Record(label, features))
    return Dataset(tuple(records))


def save_records(ds: Dataset, path) -> None:
    """Write a dataset in the package CSV format (17 significant digits)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for rec in ds.records:
            writer.writerow([rec.label] + [f"{v:.17g}" for v in rec.features])


def _affine(value, mn, mx, lo, hi):
    if mx == mn:
        return 0.5 * (lo + hi)  # constant feature maps to the midpoint
    return lo + (value - mn) * (hi - lo) / (mx - mn)


def normalize(ds: Dataset, lo: float, hi: float) -> Dataset:
    """Min-max map every feature onto [lo, hi]; stores the transform for reuse."""
    if ds.normalization is not None:
        raise StateError("dataset is already normalized")
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if len(ds) == 0:
        raise ValueError("cannot normalize an empty dataset")
    feats = ds.features_array()
    mins = tuple(float(v) for v in feats.min(axis=0))
    maxs = tuple(float(v) for v in feats.max(axis=0))
    norm = Normalization(lo, hi, mins, maxs)
    return Dataset(_map_records(ds.records, norm, clip=False), norm)


def apply_normalization(ds: Dataset, norm: Normalization) -> Dataset:
    """Apply a stored (training-set) transform; out-of-range values are clipped."""
    if ds.normalization is not None:
        raise StateError("dataset is already normalized")
    return Dataset(_map_records(ds.records, norm, clip=True), norm)


def _map_records(records, norm, clip):
    out = []
    for rec in records:
        vals = []
        for j, v in enumerate(rec.features):
            t = _affine(v, norm.mins[j], norm.maxs[j], norm.lo, norm.hi)
            if clip:
                t = min(norm.hi, max(norm.lo, t))
            vals.append(t)
        out.append(Record(rec.label, tuple(vals)))
    return tuple(out)


def split_shuffle(ds: Dataset, ratio: float = 0.8, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Seeded Fisher-Yates shuffle, then the first floor(ratio*N) records train."""
    if len(ds) == 0:
        raise ValueError("cannot split an empty dataset")
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"split ratio must lie in (0, 1), got {ratio}")
    rng = np.random.default_rng(seed)
    order = list(ds.records)
    for i in range(len(order) - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        order[i], order[j] = order[j], order[i]
    cut = int(ratio * len(order))
    return (
        Dataset(tuple(order[:cut]), ds.normalization),
        Dataset(tuple(order[cut:]), ds.normalization),
    )


def generate_synthetic(cfg: SynthConfig = SynthConfig(), seed: int = 42) -> Dataset:
    """Seeded Gaussian blobs, one per class, std = spread * (1 + overlap)."""
    rng = np.random.default_rng(seed)
    std = cfg.spread * (1.0 + cfg.overlap)
    records = []
    for label, means in enumerate(cfg.class_means):
        block = rng.normal(loc=means, scale=std, size=(cfg.n_per_class, len(means)))
        for row in block:
            records.append(Record(label, tuple(float(v) for v in row)))
    return Dataset(tuple(records))
