"""qrulab: a single-qubit data re-uploading classifier laboratory.

Exact statevector simulation of re-uploading circuits, the full
training matrix (depth, encoding scheme, loss, optimizer, schedule,
normalization), Gaussian-process and Hyperband hyperparameter search,
and circuit diagnostics (spectrum, expressibility, parity).
"""

from qrulab import analysis, circuit, dataio, hpo, qcore, training
from qrulab.errors import ConfigError, DataError, LayoutError, NumericFailure, StateError

__version__ = "0.1.0"

__all__ = [
    "analysis",
    "circuit",
    "dataio",
    "hpo",
    "qcore",
    "training",
    "ConfigError",
    "DataError",
    "LayoutError",
    "NumericFailure",
    "StateError",
    "__version__",
]
