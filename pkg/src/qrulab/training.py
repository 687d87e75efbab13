"""Losses, optimizers, learning-rate schedules, and the training loop.

All eight optimizers are implemented from their update rules over flat
numpy parameter vectors. ``optimizer_step`` is functional: it returns
fresh (params, state) so a step is replayable. Defaults follow the
common conventions: beta1 = 0.9, beta2 = 0.999, eps = 1e-8, RMSProp
decay 0.9, Adadelta rho 0.9, AdamW decay 0.01. The Adam family applies
bias correction by default (switchable off via ``bias_correction``).

The loop in ``fit`` is: per epoch, seeded shuffle, consecutive batches
(final partial batch kept), per batch the mean per-sample gradient and
one optimizer step at the scheduled learning rate. Label k trains the
scalar hypothesis toward targets[k].
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from qrulab import circuit as qc
from qrulab.errors import LayoutError

# --------------------------------------------------------------------------
# losses
# --------------------------------------------------------------------------

_LOSS_NAMES = ("l1", "l2", "huber")


@dataclass(frozen=True)
class LossKind:
    kind: str
    delta: float = 1.0

    def __post_init__(self):
        if self.kind not in _LOSS_NAMES:
            raise ValueError(f"unknown loss {self.kind!r}; expected one of {_LOSS_NAMES}")
        if self.kind == "huber" and not (math.isfinite(self.delta) and self.delta > 0):
            raise ValueError(f"huber delta must be finite and > 0, got {self.delta}")


L1 = LossKind("l1")
L2 = LossKind("l2")


def huber(delta: float = 1.0) -> LossKind:
    return LossKind("huber", delta)


def loss_and_grad(kind: LossKind, y: float, yhat: float) -> tuple[float, float]:
    """Per-sample loss and its derivative with respect to the prediction."""
    r = y - yhat
    if kind.kind == "l1":
        # derivative at r == 0 defined as 0
        return abs(r), 0.0 if r == 0 else (-1.0 if r > 0 else 1.0)
    if kind.kind == "l2":
        return r * r, -2.0 * r
    d = kind.delta
    if abs(r) <= d:
        return 0.5 * r * r, -r
    return d * (abs(r) - 0.5 * d), -d if r > 0 else d


# --------------------------------------------------------------------------
# optimizers
# --------------------------------------------------------------------------

OPTIMIZER_NAMES = (
    "sgd",
    "rmsprop",
    "adam",
    "adamax",
    "nadam",
    "adagrad",
    "adadelta",
    "adamw",
)


@dataclass(frozen=True)
class OptimizerKind:
    name: str
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    rms_decay: float = 0.9  # RMSProp moving-average coefficient
    rho: float = 0.9  # Adadelta decay
    weight_decay: float = 0.01  # AdamW decoupled decay
    bias_correction: bool = True

    def __post_init__(self):
        if self.name not in OPTIMIZER_NAMES:
            raise ValueError(
                f"unknown optimizer {self.name!r}; expected one of {OPTIMIZER_NAMES}"
            )
        for field_name in ("beta1", "beta2", "rms_decay", "rho"):
            v = getattr(self, field_name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{field_name} must lie in (0, 1), got {v}")
        if not self.eps > 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")


@dataclass(frozen=True)
class OptimizerState:
    """Accumulators; m = first moment, v = squared-gradient accumulator,
    u = infinity-norm (Adamax) or squared-update average (Adadelta)."""

    t: int = 0
    m: np.ndarray | None = None
    v: np.ndarray | None = None
    u: np.ndarray | None = None


def init_state(kind: OptimizerKind, n_params: int) -> OptimizerState:
    z = lambda: np.zeros(n_params)
    name = kind.name
    if name == "sgd":
        return OptimizerState()
    if name in ("rmsprop", "adagrad"):
        return OptimizerState(v=z())
    if name == "adamax":
        return OptimizerState(m=z(), u=z())
    if name == "adadelta":
        return OptimizerState(v=z(), u=z())
    return OptimizerState(m=z(), v=z())  # adam, nadam, adamw


def optimizer_step(
    kind: OptimizerKind,
    state: OptimizerState,
    params: np.ndarray,
    grads: np.ndarray,
    lr: float,
) -> tuple[np.ndarray, OptimizerState]:
    """One update per the named rule; returns fresh (params, state)."""
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if params.shape != grads.shape:
        raise LayoutError(f"params shape {params.shape} != grads shape {grads.shape}")
    for acc in (state.m, state.v, state.u):
        if acc is not None and acc.shape != params.shape:
            raise LayoutError("optimizer state shape does not match parameters")
    name = kind.name
    t = state.t + 1

    if name == "sgd":
        return params - lr * grads, OptimizerState(t=t)

    if name == "rmsprop":
        v = kind.rms_decay * state.v + (1.0 - kind.rms_decay) * grads**2
        # epsilon inside the root for this rule
        return params - lr * grads / np.sqrt(v + kind.eps), OptimizerState(t=t, v=v)

    if name == "adagrad":
        v = state.v + grads**2
        return params - lr * grads / (np.sqrt(v) + kind.eps), OptimizerState(t=t, v=v)

    if name == "adadelta":
        v = kind.rho * state.v + (1.0 - kind.rho) * grads**2
        delta = -np.sqrt(state.u + kind.eps) / np.sqrt(v + kind.eps) * grads
        u = kind.rho * state.u + (1.0 - kind.rho) * delta**2
        return params + delta, OptimizerState(t=t, v=v, u=u)  # lr unused by the rule

    b1, b2 = kind.beta1, kind.beta2
    m = b1 * state.m + (1.0 - b1) * grads

    if name == "adamax":
        u = np.maximum(b2 * state.u, np.abs(grads))
        m_hat = m / (1.0 - b1**t) if kind.bias_correction else m
        return params - lr * m_hat / (u + kind.eps), OptimizerState(t=t, m=m, u=u)

    v = b2 * state.v + (1.0 - b2) * grads**2
    if kind.bias_correction:
        m_hat = m / (1.0 - b1**t)
        v_hat = v / (1.0 - b2**t)
    else:
        m_hat, v_hat = m, v
    denom = np.sqrt(v_hat) + kind.eps

    if name == "adam":
        update = -lr * m_hat / denom
    elif name == "nadam":
        # Nesterov mixing: look ahead with the fresh gradient
        g_term = grads / (1.0 - b1**t) if kind.bias_correction else grads
        update = -lr * (b1 * m_hat + (1.0 - b1) * g_term) / denom
    else:  # adamw: decoupled weight decay
        update = -lr * m_hat / denom - lr * kind.weight_decay * params
    return params + update, OptimizerState(t=t, m=m, v=v)


# --------------------------------------------------------------------------
# schedules and initialization
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Schedule:
    kind: str

    def __post_init__(self):
        if self.kind not in ("constant", "step"):
            raise ValueError(f"unknown schedule {self.kind!r}")


ConstantLR = Schedule("constant")
StepDecay = Schedule("step")


def lr_at_epoch(schedule: Schedule, base_lr: float, epoch: int, total_epochs: int) -> float:
    """StepDecay divides by 10 at floor(E/2) and again at floor(3E/4)."""
    if not 0 <= epoch < total_epochs:
        raise ValueError(f"epoch {epoch} outside 0..{total_epochs - 1}")
    if schedule.kind == "constant":
        return base_lr
    if epoch < total_epochs // 2:
        return base_lr
    if epoch < (3 * total_epochs) // 4:
        return base_lr / 10.0
    return base_lr / 100.0


@dataclass(frozen=True)
class InitSpec:
    kind: str = "constant"
    mean: float = 0.5
    std: float = 0.1

    def __post_init__(self):
        if self.kind not in ("constant", "gaussian"):
            raise ValueError(f"unknown init {self.kind!r}")
        if self.kind == "gaussian" and not self.std > 0:
            raise ValueError(f"gaussian init std must be > 0, got {self.std}")


def init_params(init: InitSpec, n_params: int, rng: np.random.Generator) -> np.ndarray:
    if init.kind == "constant":
        return np.full(n_params, init.mean)
    return rng.normal(init.mean, init.std, n_params)


def default_targets(n_classes: int) -> tuple[float, ...]:
    """Evenly spaced class targets -1 + 2k/(n-1) on the hypothesis interval."""
    if n_classes < 1:
        raise ValueError("need at least one class")
    if n_classes == 1:
        return (0.0,)
    return tuple(-1.0 + 2.0 * k / (n_classes - 1) for k in range(n_classes))


# --------------------------------------------------------------------------
# the training loop
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    spec: qc.CircuitSpec
    epochs: int = 30
    batch_size: int = 1
    lr: float = 5e-4
    optimizer: OptimizerKind = OptimizerKind("adam")
    loss: LossKind = L2
    seed: int = 0
    init: InitSpec = InitSpec()
    schedule: Schedule = ConstantLR
    targets: tuple[float, ...] = (-1.0, 0.0, 1.0)

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.lr > 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")


@dataclass(frozen=True)
class TrainReport:
    train_loss: tuple[float, ...]
    train_acc: tuple[float, ...]
    test_loss: tuple[float, ...]
    test_acc: tuple[float, ...]
    final_params: np.ndarray
    trainability: float
    wall_time: float


def trainability(loss_curve: Sequence[float]) -> float:
    """Trapezoidal area under the loss curve over unit epoch steps."""
    if len(loss_curve) < 2:
        raise ValueError("trainability needs a curve of length >= 2")
    total = 0.0
    for a, b in zip(loss_curve[:-1], loss_curve[1:]):
        total += 0.5 * (a + b)
    return total


def _check_dataset(ds, targets, role):
    if len(ds.records) == 0:
        raise ValueError(f"{role} dataset is empty")
    if ds.normalization is None:
        raise ValueError(f"{role} dataset must be normalized before training")
    for rec in ds.records:
        if not 0 <= rec.label < len(targets):
            raise ValueError(
                f"{role} label {rec.label} has no target (got {len(targets)} targets)"
            )


def fit(config: TrainConfig, train_set, test_set) -> TrainReport:
    """Train the circuit; returns per-epoch curves and the final parameters.

    Deterministic: identical (config, datasets) give bitwise-identical
    curves. The recorded train loss is the running epoch mean (samples
    scored as visited); accuracies and test loss are evaluated after the
    epoch's final optimizer step.
    """
    spec = config.spec
    _check_dataset(train_set, config.targets, "train")
    _check_dataset(test_set, config.targets, "test")

    t0 = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    params = init_params(config.init, qc.param_count(spec), rng)
    state = init_state(config.optimizer, len(params))

    train_feats = [r.features for r in train_set.records]
    train_labels = [r.label for r in train_set.records]
    train_targets = [config.targets[lb] for lb in train_labels]
    test_feats = [r.features for r in test_set.records]
    test_labels = [r.label for r in test_set.records]
    n_train = len(train_feats)

    train_loss_curve, train_acc_curve = [], []
    test_loss_curve, test_acc_curve = [], []
    for epoch in range(config.epochs):
        lr_e = lr_at_epoch(config.schedule, config.lr, epoch, config.epochs)
        perm = rng.permutation(n_train)
        loss_sum = 0.0
        for start in range(0, n_train, config.batch_size):
            batch = perm[start : start + config.batch_size]
            grad_sum = np.zeros_like(params)
            for i in batch:
                h, grad_h = qc.value_and_gradient(spec, params, train_feats[i])
                loss_val, dloss = loss_and_grad(config.loss, train_targets[i], h)
                loss_sum += loss_val
                grad_sum += dloss * grad_h
            params, state = optimizer_step(
                config.optimizer, state, params, grad_sum / len(batch), lr_e
            )
        train_loss_curve.append(loss_sum / n_train)

        hits = 0
        for feats, label in zip(train_feats, train_labels):
            h = qc.forward(spec, params, feats)
            hits += qc.predict_class(h, config.targets) == label
        train_acc_curve.append(hits / n_train)

        t_loss, t_hits = 0.0, 0
        for feats, label in zip(test_feats, test_labels):
            h = qc.forward(spec, params, feats)
            t_loss += loss_and_grad(config.loss, config.targets[label], h)[0]
            t_hits += qc.predict_class(h, config.targets) == label
        test_loss_curve.append(t_loss / len(test_feats))
        test_acc_curve.append(t_hits / len(test_feats))

    return TrainReport(
        train_loss=tuple(train_loss_curve),
        train_acc=tuple(train_acc_curve),
        test_loss=tuple(test_loss_curve),
        test_acc=tuple(test_acc_curve),
        final_params=params,
        trainability=trainability(train_loss_curve) if config.epochs >= 2 else 0.0,
        wall_time=time.perf_counter() - t0,
    )
