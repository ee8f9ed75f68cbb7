"""Tensors fed to the network: offset standardisation and the sample dataset."""

from __future__ import annotations

from typing import Dict, List, Sequence, Tuple

import numpy as np
import torch
from pydantic import BaseModel
from torch.utils.data import Dataset

from mcenet.context.builder import SampleContext
from mcenet.dataio.schemas import TrainingSample

from .config import ModelConfig

Batch = Dict[str, torch.Tensor]

_STD_FLOOR = 1e-6


class Standardizer(BaseModel):
    """Per-axis mean/std of training offsets, applied at the model boundary."""

    mean: Tuple[float, float] = (0.0, 0.0)
    std: Tuple[float, float] = (1.0, 1.0)

    @classmethod
    def fit(cls, samples: Sequence[TrainingSample], enabled: bool = True) -> Standardizer:
        if not enabled or not samples:
            return cls()
        offsets = np.concatenate([np.concatenate([s.obs_offsets, s.fut_offsets]) for s in samples])
        std = np.maximum(offsets.std(axis=0), _STD_FLOOR)
        mean = offsets.mean(axis=0)
        return cls(mean=(float(mean[0]), float(mean[1])), std=(float(std[0]), float(std[1])))

    def transform(self, offsets: np.ndarray) -> np.ndarray:
        return (offsets - np.asarray(self.mean)) / np.asarray(self.std)

    def inverse(self, offsets: np.ndarray) -> np.ndarray:
        return offsets * np.asarray(self.std) + np.asarray(self.mean)


def sample_tensors(
    sample: TrainingSample,
    context: SampleContext,
    standardizer: Standardizer,
    dtype: torch.dtype = torch.float32,
) -> Batch:
    """Unbatched model inputs for one sample.

    Keys: ``obs_motion``, ``fut_motion``, ``type_onehot``, ``target`` and, when the
    context carries them, ``obs_occupancy``/``fut_occupancy`` (flattened cells per
    step) and ``obs_scene``/``fut_scene`` (``S x H x W x C``).
    """
    obs = standardizer.transform(sample.obs_offsets)
    fut = standardizer.transform(sample.fut_offsets)
    item: Batch = {
        "obs_motion": torch.as_tensor(obs, dtype=dtype),
        "fut_motion": torch.as_tensor(fut, dtype=dtype),
        "type_onehot": torch.as_tensor(sample.type_onehot, dtype=dtype),
        "target": torch.as_tensor(fut, dtype=dtype),
    }
    if context.obs_occupancy is not None and context.fut_occupancy is not None:
        item["obs_occupancy"] = torch.as_tensor(context.obs_occupancy.flat(), dtype=dtype)
        item["fut_occupancy"] = torch.as_tensor(context.fut_occupancy.flat(), dtype=dtype)
    if context.obs_scene is not None and context.fut_scene is not None:
        item["obs_scene"] = torch.as_tensor(context.obs_scene, dtype=dtype)
        item["fut_scene"] = torch.as_tensor(context.fut_scene, dtype=dtype)
    return item


def collate(items: Sequence[Batch]) -> Batch:
    return {key: torch.stack([item[key] for item in items]) for key in items[0]}


class TrajectoryDataset(Dataset):
    """Map-style dataset over ``(sample, context)`` pairs."""

    def __init__(
        self,
        samples: Sequence[TrainingSample],
        contexts: Sequence[SampleContext],
        standardizer: Standardizer,
        config: ModelConfig,
    ):
        if len(samples) != len(contexts):
            raise ValueError(f"{len(samples)} samples but {len(contexts)} contexts")
        for s in samples:
            if s.obs_len != config.obs_len or s.pred_len != config.pred_len:
                raise ValueError(
                    f"Sample {s.key} has horizon {s.obs_len}/{s.pred_len}, "
                    f"model expects {config.obs_len}/{config.pred_len}"
                )
        self.samples: List[TrainingSample] = list(samples)
        self.contexts: List[SampleContext] = list(contexts)
        self.standardizer = standardizer

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, index: int) -> Batch:
        return sample_tensors(self.samples[index], self.contexts[index], self.standardizer)
