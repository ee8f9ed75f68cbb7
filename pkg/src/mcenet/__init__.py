"""Multi-path trajectory prediction for mixed traffic with grouping and scene context."""

from .context import ContextBuilder, ContextVariant, parse_variant
from .dataio import SceneDataset, TrainingSample, load_dataset, load_from_manifest, make_windows
from .evaluation import MetricReport, evaluate, leave_one_out, run_ablation
from .model import MCENet, ModelConfig, PredictionSet, predict, train
from .ranking import rank_predictions

__all__ = [
    "ContextBuilder",
    "ContextVariant",
    "parse_variant",
    "SceneDataset",
    "TrainingSample",
    "load_dataset",
    "load_from_manifest",
    "make_windows",
    "MetricReport",
    "evaluate",
    "leave_one_out",
    "run_ablation",
    "MCENet",
    "ModelConfig",
    "PredictionSet",
    "predict",
    "train",
    "rank_predictions",
]
