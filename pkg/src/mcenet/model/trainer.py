"""Seeded mini-batch training with Adam on the evidence lower bound."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence

import pandas as pd
import torch
from torch.nn.utils import clip_grad_norm_
from torch.utils.data import DataLoader
from tqdm import tqdm

from mcenet.context.builder import SampleContext
from mcenet.dataio.schemas import TrainingSample

from .config import ModelConfig
from .data import Standardizer, TrajectoryDataset, collate
from .losses import elbo_terms
from .network import MCENet, build_model

logger = logging.getLogger(__name__)


class TrainingDivergedError(RuntimeError):
    """Raised when the loss of a batch stops being finite."""

    def __init__(self, epoch: int, batch: int, value: float):
        super().__init__(f"Loss became {value} at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


@dataclass
class EpochLoss:
    epoch: int
    mse: float
    kl: float
    total: float


@dataclass
class TrainingResult:
    model: MCENet
    standardizer: Standardizer
    history: List[EpochLoss] = field(default_factory=list)

    def history_frame(self) -> pd.DataFrame:
        return pd.DataFrame([vars(h) for h in self.history], columns=["epoch", "mse", "kl", "total"])


def kl_schedule(iteration: int, total_iterations: int, config: ModelConfig) -> float:
    """KL weight at ``iteration``: linear ramp over the first ``kl_warmup_fraction``."""
    warmup = math.ceil(config.kl_warmup_fraction * total_iterations)
    if warmup <= 0:
        return config.kl_weight
    return config.kl_weight * min(1.0, (iteration + 1) / warmup)


def train(
    model: MCENet | None,
    samples: Sequence[TrainingSample],
    contexts: Sequence[SampleContext],
    config: ModelConfig,
    *,
    standardizer: Standardizer | None = None,
    epochs: int | None = None,
    log_path: str | Path | None = None,
    progress: bool = False,
) -> TrainingResult:
    """Train ``model`` (or a freshly seeded one) and return it with per-epoch mean losses.

    Args:
    - **standardizer**: offset scaling; fitted on ``samples`` when omitted.
    - **epochs**: overrides ``config.epochs``.
    - **log_path**: where to write the per-epoch CSV (epoch, mse, kl, total).
    - **progress**: show a tqdm bar over epochs.
    """
    if not samples:
        raise ValueError("Training set is empty")
    epochs = config.epochs if epochs is None else epochs

    if model is None:
        model = build_model(config)
    if standardizer is None:
        standardizer = Standardizer.fit(samples, enabled=config.standardize_offsets)

    dataset = TrajectoryDataset(samples, contexts, standardizer, config)
    loader = DataLoader(
        dataset,
        batch_size=config.batch_size,
        shuffle=True,
        collate_fn=collate,
        generator=torch.Generator().manual_seed(config.seed),
    )
    noise = torch.Generator().manual_seed(config.seed + 1)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    scheduler = None
    if config.lr_schedule == "cosine":
        scheduler = torch.optim.lr_scheduler.CosineAnnealingLR(optimizer, T_max=epochs, eta_min=config.lr_min)

    total_iterations = epochs * len(loader)
    iteration = 0
    history: List[EpochLoss] = []

    model.train()
    for epoch in tqdm(range(1, epochs + 1), desc="training", disable=not progress):
        sums = {"mse": 0.0, "kl": 0.0, "total": 0.0}
        seen = 0
        for batch_index, batch in enumerate(loader):
            kl_weight = kl_schedule(iteration, total_iterations, config)
            pred, lp = model(batch, generator=noise)
            terms = elbo_terms(pred, batch["target"], lp, kl_weight)
            if not torch.isfinite(terms.total):
                raise TrainingDivergedError(epoch, batch_index, terms.total.item())

            optimizer.zero_grad()
            terms.total.backward()
            if config.grad_clip > 0:
                clip_grad_norm_(model.parameters(), config.grad_clip)
            optimizer.step()

            n = batch["target"].shape[0]
            sums["mse"] += terms.mse.item() * n
            sums["kl"] += terms.kl.item() * n
            sums["total"] += terms.total.item() * n
            seen += n
            iteration += 1

        if scheduler is not None:
            scheduler.step()

        record = EpochLoss(epoch=epoch, **{k: v / seen for k, v in sums.items()})
        history.append(record)
        logger.info("epoch %d/%d mse=%.5f kl=%.5f total=%.5f", epoch, epochs, record.mse, record.kl, record.total)

    model.eval()
    result = TrainingResult(model=model, standardizer=standardizer, history=history)
    if log_path is not None:
        Path(log_path).parent.mkdir(parents=True, exist_ok=True)
        result.history_frame().to_csv(log_path, index=False)
    return result


def fine_tune(
    result: TrainingResult,
    samples: Sequence[TrainingSample],
    contexts: Sequence[SampleContext],
    config: ModelConfig,
    epochs: int,
    **kwargs,
) -> TrainingResult:
    """Continue training a trained model on new samples, keeping its standardizer.

    With no samples or ``epochs == 0`` the model is returned untouched.
    """
    if epochs <= 0 or not samples:
        logger.info("Fine-tuning skipped (%d samples, %d epochs)", len(samples), epochs)
        return TrainingResult(model=result.model, standardizer=result.standardizer)
    return train(
        result.model,
        samples,
        contexts,
        config,
        standardizer=result.standardizer,
        epochs=epochs,
        **kwargs,
    )
