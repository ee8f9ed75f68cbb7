"""Evaluation protocol, ablation matrix and leave-one-out cross-validation."""

from __future__ import annotations

import copy
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np
from pydantic import BaseModel, Field
from tqdm import tqdm

from mcenet.context.builder import ContextBuilder, SampleContext
from mcenet.context.grouping import GroupingConfig
from mcenet.context.occupancy import GridSpec
from mcenet.context.raster import SceneConfig, SceneRaster, resolve_scene_raster
from mcenet.context.variants import ContextVariant, parse_variant
from mcenet.dataio.schemas import SceneDataset, SplitResult, TrainingSample
from mcenet.dataio.windows import chronological_split, make_windows, subset_frames
from mcenet.model.config import ModelConfig
from mcenet.model.inference import PredictionSet
from mcenet.model.trainer import TrainingResult, fine_tune, train

from .metrics import MetricReport, ade, best_of_k, fde
from .predictors import BasePredictor, MCENetPredictor

logger = logging.getLogger(__name__)


class PipelineConfig(BaseModel):
    """Settings shared by every run of an experiment."""

    test_fraction: float = Field(default=0.3, gt=0, lt=1)
    window_stride: int = Field(default=1, ge=1)
    k: int = Field(default=10, ge=1)
    fine_tune_epochs: int = Field(default=10, ge=0)
    model: ModelConfig = Field(default_factory=ModelConfig)
    grid: GridSpec = Field(default_factory=GridSpec)
    grouping: GroupingConfig = Field(default_factory=GroupingConfig)
    scene: SceneConfig = Field(default_factory=SceneConfig)


@dataclass
class PreparedRun:
    """Windows, contexts and the variant-sized model config of one dataset split."""

    variant: ContextVariant
    model_config: ModelConfig
    train_samples: List[TrainingSample]
    train_contexts: List[SampleContext]
    test_samples: List[TrainingSample]
    test_contexts: List[SampleContext]
    raster: SceneRaster | None = None


@dataclass
class EvaluationResult:
    report: MetricReport
    rows: List[dict] = field(default_factory=list)
    predictions: List[PredictionSet] = field(default_factory=list)


# --------------------------------------------------------------------- #
# shared pipeline
# --------------------------------------------------------------------- #

def windows_for(dataset: SceneDataset, config: PipelineConfig) -> List[TrainingSample]:
    return make_windows(
        dataset, T=config.model.obs_len, T_prime=config.model.pred_len, stride=config.window_stride
    )


def sized_model_config(variant: ContextVariant, config: PipelineConfig, raster: SceneRaster | None) -> ModelConfig:
    """``config.model`` with the optional branches switched on for ``variant``."""
    return config.model.model_copy(
        update={
            "occupancy_cells": config.grid.cells if variant.use_grouping else 0,
            "scene_channels": raster.channels if (raster is not None and variant.scene_kind) else 0,
            "scene_input_size": config.scene.input_size,
        }
    )


def contexts_for(
    dataset: SceneDataset,
    samples: Sequence[TrainingSample],
    variant: ContextVariant,
    config: PipelineConfig,
    raster: SceneRaster | None,
) -> List[SampleContext]:
    builder = ContextBuilder(dataset, variant, config.grid, config.grouping, config.scene, raster)
    return builder.build_all(samples)


def scene_raster_for(
    dataset: SceneDataset,
    variant: ContextVariant,
    visible: SceneDataset,
    config: PipelineConfig,
) -> SceneRaster | None:
    """Raster of the variant's kind; heat maps only see ``visible`` tracks."""
    if variant.scene_kind is None:
        return None
    return resolve_scene_raster(dataset, variant.scene_kind, visible.tracks, config.scene.heat_kernel_std)


def prepare_run(split: SplitResult, variant: ContextVariant | str, config: PipelineConfig) -> PreparedRun:
    """Windows and contexts for both halves of a split, with train-only heat maps."""
    if isinstance(variant, str):
        variant = parse_variant(variant)
    raster = scene_raster_for(split.train, variant, split.train, config)

    train_samples = windows_for(split.train, config)
    test_samples = windows_for(split.test, config)
    logger.info(
        "Prepared %s/%s: %d train windows, %d test windows",
        split.train.name, variant.tag, len(train_samples), len(test_samples),
    )
    return PreparedRun(
        variant=variant,
        model_config=sized_model_config(variant, config, raster),
        train_samples=train_samples,
        train_contexts=contexts_for(split.train, train_samples, variant, config, raster),
        test_samples=test_samples,
        test_contexts=contexts_for(split.test, test_samples, variant, config, raster),
        raster=raster,
    )


# --------------------------------------------------------------------- #
# evaluation
# --------------------------------------------------------------------- #

def evaluate(
    predictor: BasePredictor,
    samples: Sequence[TrainingSample],
    contexts: Sequence[SampleContext],
    k: int = 10,
    num_samples: int | None = None,
    seed: int = 0,
    dataset: str | None = None,
    variant: str | None = None,
) -> EvaluationResult:
    """Average most-likely and best-of-k ADE/FDE over ``samples``.

    Sample ``i`` is predicted with seed ``seed + i``. ``num_samples`` defaults to ``k``.
    """
    if not samples:
        raise ValueError("Test set is empty")
    if len(samples) != len(contexts):
        raise ValueError(f"{len(samples)} samples but {len(contexts)} contexts")
    num_samples = num_samples or k
    if k > num_samples:
        raise ValueError(f"k={k} exceeds num_samples={num_samples}")

    rows: List[dict] = []
    predictions: List[PredictionSet] = []
    for i, (sample, context) in enumerate(zip(samples, contexts)):
        pred = predictor.predict(sample, context, num_samples, seed=seed + i)
        gt = sample.fut_positions
        ade_bk, fde_bk = best_of_k(pred, gt, k)
        rows.append(
            {
                "dataset": sample.dataset,
                "agent_id": sample.agent_id,
                "frame": sample.last_obs_frame,
                "ade_ml": ade(pred.most_likely, gt),
                "fde_ml": fde(pred.most_likely, gt),
                "ade_bk": ade_bk,
                "fde_bk": fde_bk,
            }
        )
        predictions.append(pred)

    def mean(key: str) -> float:
        return float(np.mean([r[key] for r in rows]))

    report = MetricReport(
        dataset=dataset or samples[0].dataset,
        variant=variant or predictor.name,
        k=k,
        ade_most_likely=mean("ade_ml"),
        fde_most_likely=mean("fde_ml"),
        ade_best_of_k=mean("ade_bk"),
        fde_best_of_k=mean("fde_bk"),
        sample_count=len(rows),
    )
    logger.info(
        "%s/%s: ADE/FDE most-likely %.3f/%.3f, best-of-%d %.3f/%.3f over %d samples",
        report.dataset, report.variant, report.ade_most_likely, report.fde_most_likely,
        k, report.ade_best_of_k, report.fde_best_of_k, report.sample_count,
    )
    return EvaluationResult(report=report, rows=rows, predictions=predictions)


def train_and_evaluate(
    run: PreparedRun,
    config: PipelineConfig,
    dataset_name: str,
    log_path: Path | None = None,
) -> tuple[TrainingResult, EvaluationResult]:
    result = train(None, run.train_samples, run.train_contexts, run.model_config, log_path=log_path)
    predictor = MCENetPredictor(result.model, result.standardizer, name=run.variant.tag)
    evaluation = evaluate(
        predictor,
        run.test_samples,
        run.test_contexts,
        k=config.k,
        num_samples=max(config.k, run.model_config.num_samples),
        seed=run.model_config.seed,
        dataset=dataset_name,
        variant=run.variant.tag,
    )
    return result, evaluation


# --------------------------------------------------------------------- #
# ablation
# --------------------------------------------------------------------- #

def _ablation_job(args: tuple) -> MetricReport:
    split, tag, config, log_dir = args
    run = prepare_run(split, tag, config)
    log_path = Path(log_dir) / f"train_{run.variant.tag}.csv" if log_dir else None
    _, evaluation = train_and_evaluate(run, config, split.train.name, log_path)
    return evaluation.report


def run_ablation(
    split: SplitResult,
    variants: Sequence[str],
    config: PipelineConfig,
    workers: int = 1,
    log_dir: Path | None = None,
) -> List[MetricReport]:
    """Train and evaluate one model per variant on the same split with the same seed.

    Tags are validated before any training starts. ``workers > 1`` runs variants
    in separate processes; results come back in the order of ``variants``.
    """
    tags = [parse_variant(v).tag for v in variants]
    jobs = [(split, tag, config, log_dir) for tag in tags]

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_ablation_job, jobs))
    return [_ablation_job(job) for job in tqdm(jobs, desc="ablation", disable=len(jobs) < 2)]


# --------------------------------------------------------------------- #
# leave-one-out
# --------------------------------------------------------------------- #

def visible_portion(target: SplitResult, rate: float) -> SceneDataset:
    """The first ``rate`` of the target's training timeline."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"Visibility rate must be in [0, 1], got {rate}")
    train = target.train
    if not train.tracks:
        return train
    first, last = train.frame_bounds()
    cut = int(round(first + rate * (last - first + 1)))
    return subset_frames(train, hi=cut)


def leave_one_out(
    datasets: Sequence[SceneDataset],
    target: str,
    rates: Sequence[float],
    variant: ContextVariant | str,
    config: PipelineConfig,
    log_dir: Path | None = None,
) -> List[MetricReport]:
    """Train on every dataset but ``target``, then fine-tune and evaluate per visibility rate.

    The source model is trained once; each rate fine-tunes its own copy on the
    visible portion of the target's training split (rate 0 skips fine-tuning) and
    is evaluated on the target's test split. The target heat map is built from
    the visible portion only.
    """
    if len(datasets) < 2:
        raise ValueError(f"Leave-one-out needs at least 2 datasets, got {len(datasets)}")
    by_name: Dict[str, SceneDataset] = {d.name: d for d in datasets}
    if target not in by_name:
        raise ValueError(f"Target '{target}' is not among {list(by_name)}")
    for rate in rates:
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"Visibility rate must be in [0, 1], got {rate}")
    if isinstance(variant, str):
        variant = parse_variant(variant)

    source_samples: List[TrainingSample] = []
    source_contexts: List[SampleContext] = []
    source_channels: set[int] = set()
    for name, dataset in by_name.items():
        if name == target:
            continue
        raster = scene_raster_for(dataset, variant, dataset, config)
        samples = windows_for(dataset, config)
        source_samples.extend(samples)
        source_contexts.extend(contexts_for(dataset, samples, variant, config, raster))
        if raster is not None:
            source_channels.add(raster.channels)
    if len(source_channels) > 1:
        raise ValueError(f"Source rasters disagree on channel count: {sorted(source_channels)}")

    target_split = chronological_split(by_name[target], config.test_fraction)
    test_samples = windows_for(target_split.test, config)

    first_raster = None
    if variant.scene_kind is not None:
        first_raster = scene_raster_for(target_split.train, variant, visible_portion(target_split, 1.0), config)
    model_config = sized_model_config(variant, config, first_raster)

    logger.info("Leave-one-out on %s: %d source windows", target, len(source_samples))
    base = train(
        None,
        source_samples,
        source_contexts,
        model_config,
        log_path=Path(log_dir) / f"loo_{target}_source.csv" if log_dir else None,
    )

    reports: List[MetricReport] = []
    for rate in rates:
        visible = visible_portion(target_split, rate)
        raster = scene_raster_for(target_split.train, variant, visible, config)
        if raster is not None and model_config.scene_channels != raster.channels:
            raise ValueError(
                f"Target raster has {raster.channels} channels, model expects {model_config.scene_channels}"
            )

        tune_samples = windows_for(visible, config) if rate > 0 else []
        tune_contexts = contexts_for(visible, tune_samples, variant, config, raster) if tune_samples else []
        snapshot = TrainingResult(model=copy.deepcopy(base.model), standardizer=base.standardizer)
        tuned = fine_tune(snapshot, tune_samples, tune_contexts, model_config, epochs=config.fine_tune_epochs)
        logger.info("Rate %.2f: fine-tuned %d epochs on %d windows", rate, len(tuned.history), len(tune_samples))

        evaluation = evaluate(
            MCENetPredictor(tuned.model, tuned.standardizer, name=variant.tag),
            test_samples,
            contexts_for(target_split.test, test_samples, variant, config, raster),
            k=config.k,
            num_samples=max(config.k, model_config.num_samples),
            seed=model_config.seed,
            dataset=target,
            variant=variant.tag,
        )
        reports.append(evaluation.report.model_copy(update={"visibility_rate": rate}))
    return reports
