from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .gaussian import bivariate_log_pdf, fit_bivariate_gaussian

if TYPE_CHECKING:
    from mcenet.model.inference import PredictionSet


@dataclass(frozen=True)
class RankedPredictions:
    """``order`` sorts trajectory indices by descending score, ties to the lower index."""

    order: np.ndarray
    scores: np.ndarray

    @property
    def best_index(self) -> int:
        return int(self.order[0])


def score_trajectories(trajectories: np.ndarray) -> np.ndarray:
    """Sum over steps of each trajectory's log density under that step's fitted Gaussian."""
    trajectories = np.asarray(trajectories, dtype=np.float64)
    if trajectories.ndim != 3 or trajectories.shape[-1] != 2:
        raise ValueError(f"Trajectories must be N x T' x 2, got shape {trajectories.shape}")
    n, steps, _ = trajectories.shape
    if n < 2 or steps < 1:
        raise ValueError(f"Ranking needs N >= 2 and T' >= 1, got N={n}, T'={steps}")
    if not np.all(np.isfinite(trajectories)):
        raise ValueError("Cannot rank trajectories with non-finite positions")

    scores = np.zeros(n)
    for t in range(steps):
        step = trajectories[:, t]
        scores += bivariate_log_pdf(step, fit_bivariate_gaussian(step))
    return scores


def rank_predictions(pred: PredictionSet | np.ndarray) -> RankedPredictions:
    trajectories = pred.trajectories if hasattr(pred, "trajectories") else pred
    scores = score_trajectories(trajectories)
    order = np.argsort(-scores, kind="stable")
    return RankedPredictions(order=order, scores=scores)
