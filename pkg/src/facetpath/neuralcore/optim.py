"""Adam with a time-decayed learning rate."""

from __future__ import annotations

import numpy as np

from .layers import Param
from .training import TrainConfig

__all__ = ["Adam"]


class Adam:
    """Standard Adam (b1=0.9, b2=0.999, eps=1e-8).

    The effective rate at update t (counted in batch updates, starting
    at 1) is lr / (1 + time_decay * t).
    """

    B1 = 0.9
    B2 = 0.999
    EPS = 1e-8

    def __init__(self, params: list[Param], config: TrainConfig):
        self.params = params
        self.lr = config.learning_rate
        self.time_decay = config.time_decay
        self.t = 0
        self._m = [np.zeros_like(p.value) for p in params]
        self._v = [np.zeros_like(p.value) for p in params]

    def effective_rate(self, t: int) -> float:
        return self.lr / (1.0 + self.time_decay * t)

    def step(self) -> None:
        """Apply one update from the gradients currently held by params."""
        self.t += 1
        lr_t = self.effective_rate(self.t)
        bc1 = 1.0 - self.B1**self.t
        bc2 = 1.0 - self.B2**self.t
        for p, m, v in zip(self.params, self._m, self._v):
            g = p.grad
            m *= self.B1
            m += (1.0 - self.B1) * g
            v *= self.B2
            v += (1.0 - self.B2) * g * g
            m_hat = m / bc1
            v_hat = v / bc2
            p.value -= lr_t * m_hat / (np.sqrt(v_hat) + self.EPS)

    def zero_grads(self) -> None:
        for p in self.params:
            p.zero_grad()
