"""Mini-batch training loop with early stopping on validation loss."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["TrainConfig", "TrainHistory", "train_loop"]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    time_decay: float = 0.00001
    batch_size: int = 128
    max_epochs: int = 300
    patience: int = 20
    seed: int = 0
    validation_fraction: float = 0.1  # chronologically last slice of train

    def __post_init__(self) -> None:
        for name in ("learning_rate", "time_decay", "batch_size", "max_epochs", "patience"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.patience >= self.max_epochs:
            raise ValueError("patience must be smaller than max_epochs")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must be in (0, 1)")


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int = 0  # 1-based
    stopped_epoch: int = 0

    @property
    def best_val_loss(self) -> float:
        return self.val_loss[self.best_epoch - 1]

    def to_json(self) -> dict:
        return {
            "train_loss": self.train_loss,
            "val_loss": self.val_loss,
            "best_epoch": self.best_epoch,
            "stopped_epoch": self.stopped_epoch,
        }


def _batches(n: int, batch_size: int, order: np.ndarray | None = None):
    idx = order if order is not None else np.arange(n)
    for start in range(0, n, batch_size):
        yield idx[start : start + batch_size]


def train_loop(model, train_ds, val_ds, config: TrainConfig) -> TrainHistory:
    """Train ``model`` until validation loss stalls for ``patience`` epochs.

    The model contract: ``params()`` lists Param objects,
    ``batch_loss_and_grads(ds, idx)`` accumulates gradients and returns the
    mean per-example loss, ``batch_loss(ds, idx)`` evaluates without
    gradients. Datasets just need ``len``. The parameters from the best
    validation epoch are restored before returning. All shuffling comes
    from ``config.seed``; epoch-end short batches are used as-is.
    """
    from .optim import Adam

    n_train = len(train_ds)
    n_val = len(val_ds)
    if n_train == 0:
        raise ValueError("empty training set")
    if n_val == 0:
        raise ValueError("empty validation set")

    rng = np.random.default_rng(config.seed)
    params = model.params()
    opt = Adam(params, config)
    history = TrainHistory()
    best_val = np.inf
    best_snapshot: list[np.ndarray] | None = None
    stale_epochs = 0

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(n_train)
        losses = []
        weights = []
        for idx in _batches(n_train, config.batch_size, order):
            opt.zero_grads()
            losses.append(model.batch_loss_and_grads(train_ds, idx))
            weights.append(len(idx))
            opt.step()
        train_loss = float(np.average(losses, weights=weights))

        val_losses = []
        val_weights = []
        for idx in _batches(n_val, config.batch_size):
            val_losses.append(model.batch_loss(val_ds, idx))
            val_weights.append(len(idx))
        val_loss = float(np.average(val_losses, weights=val_weights))

        history.train_loss.append(train_loss)
        history.val_loss.append(val_loss)

        if val_loss < best_val:
            best_val = val_loss
            history.best_epoch = epoch
            best_snapshot = [p.value.copy() for p in params]
            stale_epochs = 0
        else:
            stale_epochs += 1

        history.stopped_epoch = epoch
        if stale_epochs >= config.patience:
            break

    if best_snapshot is not None:
        for p, saved in zip(params, best_snapshot):
            p.value[...] = saved
    return history
