"""Global hyperparameter search over the discrete training grid.

Two searchers share one space abstraction: a Gaussian-process surrogate
with a confidence-bound acquisition (the objective is minimized, so the
utility -mu + kappa*sigma is maximized over the grid), and Hyperband
successive halving with exact integer bracket accounting.

The grid is small (at most 3360 points), so acquisition optimization is
full enumeration of unevaluated configs; ties resolve to the lowest
enumeration index, making both searchers bit-deterministic given
(space, seed, objective). Batch evaluations (the initial design, each
Hyperband rung) may fan out over a bounded thread pool; results are
collected in submission order so trial numbering never depends on
scheduling.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import log10
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from qrulab.errors import NumericFailure
from qrulab.training import L1, L2, OPTIMIZER_NAMES, LossKind, OptimizerKind, huber

DEFAULT_DEPTH_CHOICES = tuple(range(1, 11))
DEFAULT_LR_CHOICES = (0.5, 0.05, 0.005, 0.0005, 0.00005, 0.000005, 0.0000005)
DEFAULT_LOSS_CHOICES = (L1, L2, huber(1.0))
DEFAULT_OPTIMIZER_CHOICES = tuple(OptimizerKind(name) for name in OPTIMIZER_NAMES)
NORMALIZATION_CHOICES = ((-math.pi, math.pi), (0.0, 2.0 * math.pi))


@dataclass(frozen=True)
class HpoConfig:
    """One point of the grid; normalization is None when that dimension is absent."""

    depth: int
    lr: float
    loss: LossKind
    optimizer: OptimizerKind
    normalization: tuple[float, float] | None = None


@dataclass(frozen=True)
class HpoSpace:
    depth_choices: tuple[int, ...] = DEFAULT_DEPTH_CHOICES
    lr_choices: tuple[float, ...] = DEFAULT_LR_CHOICES
    loss_choices: tuple[LossKind, ...] = DEFAULT_LOSS_CHOICES
    optimizer_choices: tuple[OptimizerKind, ...] = DEFAULT_OPTIMIZER_CHOICES
    # optional extra dimension; None leaves normalization out of the search
    normalization_choices: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        for name, choices in self.dimensions():
            if len(choices) == 0:
                raise ValueError(f"dimension {name} has no choices")

    def dimensions(self) -> list[tuple[str, tuple]]:
        dims = [
            ("depth", self.depth_choices),
            ("lr", self.lr_choices),
            ("loss", self.loss_choices),
            ("optimizer", self.optimizer_choices),
        ]
        if self.normalization_choices is not None:
            dims.append(("normalization", self.normalization_choices))
        return dims

    def grid(self) -> list[HpoConfig]:
        """Every config in deterministic enumeration order (dimension-major)."""
        dims = [choices for _, choices in self.dimensions()]
        configs = []
        for values in itertools.product(*dims):
            if self.normalization_choices is None:
                configs.append(HpoConfig(*values))
            else:
                configs.append(HpoConfig(*values[:4], normalization=values[4]))
        return configs


def _coord(choices: tuple, value, name: str) -> float:
    try:
        idx = choices.index(value)
    except ValueError:
        raise ValueError(f"{name} value {value!r} is not in the space") from None
    if len(choices) == 1:
        return 0.0
    if name == "depth":
        lo, hi = min(choices), max(choices)
        return (value - lo) / (hi - lo)
    if name == "lr":
        # log-scale position; the largest rate maps to 0, the smallest to 1
        top = log10(max(choices))
        bot = log10(min(choices))
        return (top - log10(value)) / (top - bot)
    return idx / (len(choices) - 1)  # ordinal for categorical dimensions


def encode_config(space: HpoSpace, config: HpoConfig) -> np.ndarray:
    """Unit-cube embedding of a config, one coordinate per dimension."""
    coords = []
    for name, choices in space.dimensions():
        coords.append(_coord(choices, getattr(config, name), name))
    return np.array(coords)


# --------------------------------------------------------------------------
# Gaussian process surrogate
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GpModel:
    """Squared-exponential GP over the unit cube with fixed hyperparameters."""

    X: np.ndarray  # (n, d) encoded configs
    y: np.ndarray  # (n,) observed objectives
    length_scale: float = 0.5
    signal_var: float = 1.0
    jitter: float = 1e-8

    def __post_init__(self):
        if len(self.X) != len(self.y):
            raise ValueError("X and y must have equal length")
        if not self.jitter > 0:
            raise ValueError("jitter must be positive")


def _kernel(model: GpModel, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
    return model.signal_var * np.exp(-d2 / (2.0 * model.length_scale**2))


def _posterior_batch(model: GpModel, queries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    n = len(model.y)
    if n == 0:
        prior = np.full(len(queries), model.signal_var)
        return np.zeros(len(queries)), prior
    k_obs = _kernel(model, model.X, model.X) + model.jitter * np.eye(n)
    try:
        factor = cho_factor(k_obs)
    except LinAlgError as exc:
        raise NumericFailure(f"GP covariance factorization failed: {exc}") from exc
    k_star = _kernel(model, model.X, queries)  # (n, q)
    mu = k_star.T @ cho_solve(factor, model.y)
    var = model.signal_var - np.einsum("nq,nq->q", k_star, cho_solve(factor, k_star))
    return mu, np.maximum(var, 0.0)


def gp_posterior(model: GpModel, x: np.ndarray) -> tuple[float, float]:
    """Posterior (mean, variance >= 0) at one encoded point; (0, sigma_f^2) prior."""
    mu, var = _posterior_batch(model, np.asarray(x, dtype=float)[None, :])
    return float(mu[0]), float(var[0])


def acquisition(mu: float, var: float, kappa: float) -> float:
    """Confidence-bound utility for a minimized objective: -mu + kappa*sqrt(var)."""
    if var < 0:
        raise ValueError(f"variance must be >= 0, got {var}")
    return -mu + kappa * math.sqrt(var)


# --------------------------------------------------------------------------
# search drivers
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Trial:
    config: HpoConfig
    objective: float
    budget: int
    index: int
    best_so_far: float


@dataclass(frozen=True)
class SearchResult:
    trials: tuple[Trial, ...]
    capped: bool = False  # n_calls exceeded the grid and was truncated

    def best(self) -> Trial:
        return min(self.trials, key=lambda t: (t.objective, t.index))


def _pool_map(fn: Callable, items: Sequence, threads: int) -> list:
    """Map preserving input order; optional bounded thread fan-out."""
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, item) for item in items]
        return [f.result() for f in futures]


def _checked(value: float, config: HpoConfig) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise NumericFailure(f"objective returned non-finite value {value} for {config}")
    return value


def bayes_search(
    space: HpoSpace,
    objective: Callable[[HpoConfig], float],
    n_calls: int = 50,
    kappa: float = 4.0,
    seed: int = 0,
    n_initial: int = 10,
    budget: int = 30,
    threads: int = 1,
) -> SearchResult:
    """GP-guided minimization over the full grid.

    n_initial seeded-random distinct configs come first; afterwards each
    step fits the GP on everything evaluated, scores every unevaluated
    grid point with the confidence-bound utility, and takes the argmax
    (ties to the lowest enumeration index). ``budget`` only annotates
    the trials (the objective's own epoch count).
    """
    if n_calls < 1:
        raise ValueError(f"n_calls must be >= 1, got {n_calls}")
    if not 1 <= n_initial < max(n_calls, 2):
        raise ValueError(f"need 1 <= n_initial < n_calls, got {n_initial} / {n_calls}")
    grid = space.grid()
    capped = n_calls > len(grid)
    n_calls = min(n_calls, len(grid))
    n_initial = min(n_initial, n_calls)

    rng = np.random.default_rng(seed)
    initial = [int(i) for i in rng.choice(len(grid), size=n_initial, replace=False)]
    evaluated: dict[int, float] = {}
    order: list[int] = []

    results = _pool_map(lambda i: _checked(objective(grid[i]), grid[i]), initial, threads)
    for i, value in zip(initial, results):
        evaluated[i] = value
        order.append(i)

    encoded = np.array([encode_config(space, c) for c in grid])
    while len(order) < n_calls:
        model = GpModel(
            X=encoded[order], y=np.array([evaluated[i] for i in order])
        )
        remaining = [i for i in range(len(grid)) if i not in evaluated]
        mu, var = _posterior_batch(model, encoded[remaining])
        utility = -mu + kappa * np.sqrt(var)
        pick = remaining[int(np.argmax(utility))]  # argmax takes the first maximum
        evaluated[pick] = _checked(objective(grid[pick]), grid[pick])
        order.append(pick)

    trials = []
    best = math.inf
    for index, i in enumerate(order):
        best = min(best, evaluated[i])
        trials.append(Trial(grid[i], evaluated[i], budget, index, best))
    return SearchResult(tuple(trials), capped=capped)


def hyperband_brackets(max_budget: int, eta: int) -> list[tuple[int, int]]:
    """The (n_configs, initial_budget) pairs of each bracket, s = s_max..0."""
    if max_budget < 1:
        raise ValueError(f"max_budget must be >= 1, got {max_budget}")
    if eta < 2:
        raise ValueError(f"eta must be >= 2, got {eta}")
    s_max = 0
    while eta ** (s_max + 1) <= max_budget:
        s_max += 1
    out = []
    for s in range(s_max, -1, -1):
        n = -(-((s_max + 1) * eta**s) // (s + 1))  # exact ceil
        r = max(1, max_budget // eta**s)  # floor(R * eta^-s), min 1
        out.append((n, r))
    return out


def hyperband_search(
    space: HpoSpace,
    budgeted_objective: Callable[[HpoConfig, int], float],
    max_budget: int = 30,
    eta: int = 3,
    seed: int = 0,
    threads: int = 1,
) -> SearchResult:
    """Standard Hyperband over the grid; budgets are epochs.

    Every evaluation lands in the history. Within a rung the kept count
    is floor(n_i/eta), ranked by ascending loss with ties to the lower
    trial index; rung i of bracket s runs at budget
    floor(max_budget / eta^(s-i)) with minimum 1, so the final rung of
    every bracket reaches max_budget exactly and no budget exceeds it.
    """
    if max_budget < 1:
        raise ValueError(f"max_budget must be >= 1, got {max_budget}")
    if eta < 2:
        raise ValueError(f"eta must be >= 2, got {eta}")
    grid = space.grid()
    rng = np.random.default_rng(seed)
    s_max = 0
    while eta ** (s_max + 1) <= max_budget:
        s_max += 1

    trials: list[Trial] = []
    best = math.inf
    for s in range(s_max, -1, -1):
        n = -(-((s_max + 1) * eta**s) // (s + 1))
        survivors = [grid[int(i)] for i in rng.integers(0, len(grid), size=n)]
        for i in range(s + 1):
            n_i = n // eta**i
            budget_i = max(1, max_budget // eta ** (s - i))
            losses = _pool_map(
                lambda cfg, b=budget_i: _checked(budgeted_objective(cfg, b), cfg),
                survivors,
                threads,
            )
            rung: list[Trial] = []
            for cfg, loss in zip(survivors, losses):
                best = min(best, loss)
                rung.append(Trial(cfg, loss, budget_i, len(trials), best))
                trials.append(rung[-1])
            if i < s:
                keep = n_i // eta
                rung.sort(key=lambda t: (t.objective, t.index))
                survivors = [t.config for t in rung[:keep]]
    # best_so_far must be the running minimum in trial order
    return SearchResult(tuple(trials))
