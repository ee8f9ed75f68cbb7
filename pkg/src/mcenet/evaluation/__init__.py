"""Displacement metrics, predictors and the experiment runners."""

from .metrics import MetricReport, ade, best_of_k, fde
from .predictors import BasePredictor, ConstantVelocityPredictor, MCENetPredictor
from .experiments import (
    EvaluationResult,
    PipelineConfig,
    PreparedRun,
    evaluate,
    leave_one_out,
    prepare_run,
    run_ablation,
    train_and_evaluate,
    visible_portion,
)
from .reports import (
    prediction_rows,
    read_predictions,
    read_reports,
    write_predictions,
    write_reports,
    write_sample_rows,
)

__all__ = [
    "MetricReport",
    "ade",
    "best_of_k",
    "fde",
    "BasePredictor",
    "ConstantVelocityPredictor",
    "MCENetPredictor",
    "EvaluationResult",
    "PipelineConfig",
    "PreparedRun",
    "evaluate",
    "leave_one_out",
    "prepare_run",
    "run_ablation",
    "train_and_evaluate",
    "visible_portion",
    "prediction_rows",
    "read_predictions",
    "read_reports",
    "write_predictions",
    "write_reports",
    "write_sample_rows",
]
