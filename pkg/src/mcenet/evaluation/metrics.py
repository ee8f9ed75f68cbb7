from __future__ import annotations

from typing import Tuple

import numpy as np
from pydantic import BaseModel, Field

from mcenet.model.inference import PredictionSet


def _check_pair(pred: np.ndarray, gt: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64).reshape(-1, 2)
    gt = np.asarray(gt, dtype=np.float64).reshape(-1, 2)
    if len(pred) == 0 or len(gt) == 0:
        raise ValueError("Trajectories must contain at least one step")
    if len(pred) != len(gt):
        raise ValueError(f"Prediction has {len(pred)} steps, ground truth has {len(gt)}")
    return pred, gt


def ade(pred: np.ndarray, gt: np.ndarray) -> float:
    """Mean Euclidean distance over all steps, in meters."""
    pred, gt = _check_pair(pred, gt)
    return float(np.linalg.norm(pred - gt, axis=1).mean())


def fde(pred: np.ndarray, gt: np.ndarray) -> float:
    """Euclidean distance at the final step, in meters."""
    pred, gt = _check_pair(pred, gt)
    return float(np.linalg.norm(pred[-1] - gt[-1]))


def best_of_k(pred_set: PredictionSet, gt: np.ndarray, k: int) -> Tuple[float, float]:
    """Minimum ADE and, independently, minimum FDE over the ``k`` highest-ranked samples."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > pred_set.num_samples:
        raise ValueError(f"k={k} exceeds the {pred_set.num_samples} predicted samples")
    candidates = pred_set.top_k(k)
    return min(ade(c, gt) for c in candidates), min(fde(c, gt) for c in candidates)


class MetricReport(BaseModel):
    """Averaged most-likely and best-of-k errors of one model on one test split."""

    dataset: str
    variant: str
    k: int = Field(ge=1)
    ade_most_likely: float = Field(ge=0)
    fde_most_likely: float = Field(ge=0)
    ade_best_of_k: float = Field(ge=0)
    fde_best_of_k: float = Field(ge=0)
    sample_count: int = Field(ge=0)
    visibility_rate: float | None = None

    def row(self) -> dict:
        row = {
            "dataset": self.dataset,
            "variant": self.variant,
            "k": self.k,
            "ade_ml": self.ade_most_likely,
            "fde_ml": self.fde_most_likely,
            "ade_bk": self.ade_best_of_k,
            "fde_bk": self.fde_best_of_k,
            "n_samples": self.sample_count,
        }
        if self.visibility_rate is not None:
            row["visibility_rate"] = self.visibility_rate
        return row
