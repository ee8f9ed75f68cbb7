"""Predictors evaluated by the experiment runners."""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from mcenet.context.builder import SampleContext
from mcenet.dataio.schemas import TrainingSample
from mcenet.dataio.windows import offsets_to_positions
from mcenet.model.data import Standardizer
from mcenet.model.inference import PredictionSet, predict
from mcenet.model.network import MCENet


class BasePredictor(ABC):
    """Produces ``num_samples`` ranked futures for one sample."""

    name: str = "predictor"

    @abstractmethod
    def predict(
        self,
        sample: TrainingSample,
        context: SampleContext,
        num_samples: int,
        seed: int = 0,
    ) -> PredictionSet:
        """Return the predicted futures with ranking filled in."""
        pass


class MCENetPredictor(BasePredictor):
    def __init__(self, model: MCENet, standardizer: Standardizer, name: str = "mcenet"):
        self.model = model
        self.standardizer = standardizer
        self.name = name

    def predict(self, sample, context, num_samples, seed=0):
        return predict(self.model, sample, context, self.standardizer, num_samples=num_samples, seed=seed)


class ConstantVelocityPredictor(BasePredictor):
    """Repeats the last observed offset; every sample is the same straight line.

    Exact on noiseless constant-velocity data, so it doubles as a perfect predictor.
    """

    name = "cv"

    def predict(self, sample, context, num_samples, seed=0):
        velocity = sample.obs_offsets[-1]
        path = offsets_to_positions(sample.anchor, np.repeat(velocity[None], sample.pred_len, axis=0))
        trajectories = np.repeat(path[None], num_samples, axis=0)
        return PredictionSet(
            sample_key=sample.key,
            trajectories=trajectories,
            scores=np.zeros(num_samples),
            order=np.arange(num_samples),
            most_likely_index=0,
        )
