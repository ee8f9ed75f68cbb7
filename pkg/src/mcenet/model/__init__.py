"""The dual-encoder conditional variational network, its training and sampling."""

from .config import ModelConfig
from .losses import LatentParams, LossTerms, elbo_loss, elbo_terms, kl_divergence, reparameterize
from .data import Batch, Standardizer, TrajectoryDataset, collate, sample_tensors
from .network import (
    ContextEncoder,
    EncodedContext,
    LatentHead,
    MCENet,
    SceneCNN,
    TrajectoryDecoder,
    build_model,
)
from .trainer import (
    EpochLoss,
    TrainingDivergedError,
    TrainingResult,
    fine_tune,
    kl_schedule,
    train,
)
from .checkpoint import (
    FORMAT_VERSION,
    ContextSettings,
    LoadedCheckpoint,
    checkpoint_digest,
    load_checkpoint,
    save_checkpoint,
)
from .inference import PredictionSet, predict, predict_many

__all__ = [
    "ModelConfig",
    "LatentParams",
    "LossTerms",
    "elbo_loss",
    "elbo_terms",
    "kl_divergence",
    "reparameterize",
    "Batch",
    "Standardizer",
    "TrajectoryDataset",
    "collate",
    "sample_tensors",
    "ContextEncoder",
    "EncodedContext",
    "LatentHead",
    "MCENet",
    "SceneCNN",
    "TrajectoryDecoder",
    "build_model",
    "EpochLoss",
    "TrainingDivergedError",
    "TrainingResult",
    "fine_tune",
    "kl_schedule",
    "train",
    "FORMAT_VERSION",
    "ContextSettings",
    "LoadedCheckpoint",
    "checkpoint_digest",
    "load_checkpoint",
    "save_checkpoint",
    "PredictionSet",
    "predict",
    "predict_many",
]
