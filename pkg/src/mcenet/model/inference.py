"""N-sample prediction from the prior, anchored at the last observed position."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
import torch

from mcenet.context.builder import SampleContext
from mcenet.dataio.schemas import TrainingSample
from mcenet.dataio.windows import offsets_to_positions
from mcenet.ranking import rank_predictions

from .data import Standardizer, collate, sample_tensors
from .network import EncodedContext, MCENet


@dataclass
class PredictionSet:
    """``N`` predicted futures of one sample, in meters.

    ``order`` lists trajectory indices by descending ranking score; it and
    ``scores`` are filled by ``mcenet.ranking.rank_predictions``.
    """

    sample_key: str
    trajectories: np.ndarray
    scores: np.ndarray | None = None
    order: np.ndarray | None = None
    most_likely_index: int = 0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.trajectories = np.asarray(self.trajectories, dtype=np.float64)
        if self.trajectories.ndim != 3 or self.trajectories.shape[-1] != 2:
            raise ValueError(f"Trajectories must be N x T' x 2, got {self.trajectories.shape}")

    @property
    def num_samples(self) -> int:
        return self.trajectories.shape[0]

    @property
    def most_likely(self) -> np.ndarray:
        return self.trajectories[self.most_likely_index]

    def top_k(self, k: int) -> np.ndarray:
        """The ``k`` highest-ranked trajectories (insertion order when unranked)."""
        order = self.order if self.order is not None else np.arange(self.num_samples)
        return self.trajectories[order[:k]]


def predict(
    model: MCENet,
    sample: TrainingSample,
    context: SampleContext,
    standardizer: Standardizer,
    num_samples: int | None = None,
    seed: int = 0,
    rank: bool = True,
) -> PredictionSet:
    """Decode ``num_samples`` futures from ``z ~ N(0, I)``.

    The X-encoder runs once; the Y-encoder is not used. Ranking is applied when
    ``rank`` is set and there are at least two samples.
    """
    n = num_samples or model.config.num_samples
    if n < 1:
        raise ValueError(f"num_samples must be >= 1, got {n}")

    model.eval()
    generator = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        batch = collate([sample_tensors(sample, context, standardizer)])
        phi_x = model.encode_past(batch)
        z = torch.randn((n, model.config.latent_dim), generator=generator)
        offsets = model.decode(EncodedContext(phi_x.phi.expand(n, -1)), z)

    offsets = standardizer.inverse(offsets.numpy().astype(np.float64))
    trajectories = np.stack([offsets_to_positions(sample.anchor, o) for o in offsets])
    prediction = PredictionSet(sample_key=sample.key, trajectories=trajectories)

    if rank and n >= 2:
        ranked = rank_predictions(prediction)
        prediction.scores = ranked.scores
        prediction.order = ranked.order
        prediction.most_likely_index = ranked.best_index
    return prediction


def predict_many(
    model: MCENet,
    samples: Sequence[TrainingSample],
    contexts: Sequence[SampleContext],
    standardizer: Standardizer,
    num_samples: int | None = None,
    seed: int = 0,
) -> List[PredictionSet]:
    """``predict`` for each sample with seed ``seed + index``."""
    return [
        predict(model, s, c, standardizer, num_samples=num_samples, seed=seed + i)
        for i, (s, c) in enumerate(zip(samples, contexts, strict=True))
    ]
