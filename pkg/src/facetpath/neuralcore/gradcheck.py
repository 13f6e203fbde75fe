"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .layers import Param

__all__ = ["finite_difference_check", "max_relative_error"]


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Elementwise |a - n| / max(|a|, |n|, 1e-3), maximised.

    The floor keeps near-zero gradient pairs from blowing up the ratio on
    finite-difference noise alone.
    """
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-3)
    return float((np.abs(analytic - numeric) / denom).max())


def finite_difference_check(
    loss_fn: Callable[[], float],
    params: list[Param],
    epsilon: float = 1e-5,
) -> float:
    """Compare each param's ``grad`` against central differences of loss_fn.

    ``loss_fn`` must recompute the full forward pass from current parameter
    values. The caller is responsible for having run one backward pass so
    ``grad`` holds the analytic gradient. Returns the worst relative error
    over every parameter element.
    """
    worst = 0.0
    for p in params:
        flat = p.value.reshape(-1)
        grad = p.grad.reshape(-1)
        numeric = np.empty_like(flat)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + epsilon
            up = loss_fn()
            flat[k] = orig - epsilon
            down = loss_fn()
            flat[k] = orig
            numeric[k] = (up - down) / (2.0 * epsilon)
        worst = max(worst, max_relative_error(grad, numeric))
    return worst
