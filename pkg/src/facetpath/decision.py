"""Confidence scoring and the threshold rule that truncates generated paths.

The per-step confidence score is the Gini coefficient of the multinomial
distribution the decoder produced for that step: 0 for a uniform
distribution (clueless), (n-1)/n for a one-hot distribution (certain).
A node is kept iff its Gini clears the confidence threshold ``ct``; the
first node that fails stops the path there. Lower thresholds keep deeper
paths (higher precision of the filtered result set, lower recall).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .taxonomy import Path

if TYPE_CHECKING:  # pragma: no cover
    from .predictors import PathPrediction

__all__ = ["DecisionConfig", "gini", "gini_pairwise", "decision_rule", "truncate_prediction"]

# Default threshold: the knee of the observed precision/recall trade-off at
# production scale. On other data it is a starting point, not an optimum.
DEFAULT_CT = 0.993


@dataclass(frozen=True)
class DecisionConfig:
    ct: float = DEFAULT_CT
    # Optional final check that the truncated path exists in the taxonomy;
    # failing paths are dropped to the empty suggestion.
    safety_check: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.ct <= 1.0:
            raise ValueError(f"ct must be in [0, 1], got {self.ct}")


def gini(d) -> float:
    """Gini coefficient of a probability vector, in [0, (n-1)/n].

    Computed with the sorted closed form, equivalent to the mean absolute
    difference between all component pairs divided by twice the mean.
    """
    x = np.asarray(d, dtype=np.float64)
    n = x.size
    if n == 0:
        raise ValueError("gini of an empty distribution is undefined")
    if n == 1:
        return 0.0
    total = float(x.sum())
    if total <= 0.0:
        raise ValueError("gini needs a distribution with positive mass")
    xs = np.sort(x)
    ranks = np.arange(1, n + 1, dtype=np.float64)
    g = 2.0 * float(ranks @ xs) / (n * total) - (n + 1.0) / n
    # Floating residue can leave g a hair outside the closed range.
    return min(max(g, 0.0), (n - 1.0) / n)


def gini_pairwise(d) -> float:
    """O(n^2) Gini straight from the defining double sum. Reference only."""
    x = np.asarray(d, dtype=np.float64)
    n = x.size
    if n == 0:
        raise ValueError("gini of an empty distribution is undefined")
    if n == 1:
        return 0.0
    mean = float(x.mean())
    if mean <= 0.0:
        raise ValueError("gini needs a distribution with positive mass")
    diff = np.abs(x[:, None] - x[None, :]).sum()
    return float(diff / (2.0 * n * n * mean))


def decision_rule(g: float, config: DecisionConfig) -> int:
    """1 = confident enough to keep the node, 0 = stop generation here."""
    if not np.isfinite(g):
        raise ValueError(f"confidence score must be finite, got {g}")
    return 1 if g >= config.ct else 0


def truncate_prediction(pred: "PathPrediction", config: DecisionConfig, tree=None) -> Path:
    """Keep the longest prefix of generated nodes whose steps all clear ct.

    The scan stops at the first node whose producing distribution is not
    confident enough; an empty result means "suggest no facet". With
    ``safety_check`` on and a tree provided, a truncated path missing from
    the taxonomy is dropped entirely.
    """
    kept: list[str] = []
    for node, g in zip(pred.nodes, pred.step_gini):
        if decision_rule(g, config) != 1:
            break
        kept.append(node.label)
    path = Path(tuple(kept))
    if config.safety_check and tree is not None and path and not tree.has_prefix(path.labels):
        return Path(())
    return path
