"""``mcenet`` command-line entry point."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Sequence

import yaml

from mcenet.context.raster import (
    RasterKind,
    RasterShapeError,
    build_heat_map_raster,
    raster_shape_for,
    resolve_scene_raster,
    save_raster_cache,
)
from mcenet.context.variants import parse_variant
from mcenet.dataio.readers import load_from_manifest
from mcenet.dataio.schemas import SceneDataset
from mcenet.dataio.windows import chronological_split, make_windows
from mcenet.evaluation.experiments import (
    contexts_for,
    evaluate,
    leave_one_out,
    prepare_run,
    run_ablation,
    scene_raster_for,
    windows_for,
)
from mcenet.evaluation.predictors import BasePredictor, ConstantVelocityPredictor, MCENetPredictor
from mcenet.evaluation.reports import prediction_rows, write_predictions, write_reports, write_sample_rows
from mcenet.model.checkpoint import ContextSettings, load_checkpoint, save_checkpoint
from mcenet.model.trainer import TrainingDivergedError, train

from .config import ConfigError, ExperimentConfig, load_config, write_resolved_config
from .plots import emit_plots

logger = logging.getLogger("mcenet")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

_USER_ERRORS = (ValueError, OSError, TrainingDivergedError)


# --------------------------------------------------------------------- #
# helpers
# --------------------------------------------------------------------- #

def _datasets(config: ExperimentConfig) -> List[SceneDataset]:
    return [load_from_manifest(p) for p in config.data.manifests]


def _dataset(config: ExperimentConfig, name: str | None) -> SceneDataset:
    datasets = _datasets(config)
    if name is None:
        return datasets[0]
    for d in datasets:
        if d.name == name:
            return d
    raise ConfigError(f"data.manifests: no dataset named '{name}' (have {[d.name for d in datasets]})")


def _predictor(
    args: argparse.Namespace,
) -> tuple[BasePredictor, str | None, int | None, ContextSettings | None]:
    """Predictor, the variant it needs, its training seed and the context settings it was trained with."""
    if args.predictor == "cv":
        return ConstantVelocityPredictor(), "baseline", None, None
    if args.checkpoint is None:
        raise ConfigError("--checkpoint is required unless --predictor cv is given")
    loaded = load_checkpoint(args.checkpoint)
    predictor = MCENetPredictor(loaded.model, loaded.standardizer, name=loaded.variant)
    return predictor, loaded.variant, loaded.config.seed, loaded.contexts


def _test_windows(
    config: ExperimentConfig,
    dataset: SceneDataset,
    variant: str,
    trained_with: ContextSettings | None = None,
):
    pipeline = config.pipeline()
    if trained_with is not None:
        configured = ContextSettings(grid=pipeline.grid, grouping=pipeline.grouping, scene=pipeline.scene)
        if configured != trained_with:
            logger.warning("Context settings differ from the checkpoint; using the checkpoint's")
        pipeline = pipeline.model_copy(update=dict(trained_with))
    v = parse_variant(variant)
    split = chronological_split(dataset, pipeline.test_fraction)
    raster = scene_raster_for(split.train, v, split.train, pipeline)
    samples = windows_for(split.test, pipeline)
    return samples, contexts_for(split.test, samples, v, pipeline, raster), raster


# --------------------------------------------------------------------- #
# subcommands
# --------------------------------------------------------------------- #

def cmd_prepare(args: argparse.Namespace, config: ExperimentConfig) -> int:
    out = config.experiment.output_dir
    pipeline = config.pipeline()
    summary: Dict[str, dict] = {}
    for dataset in _datasets(config):
        split = chronological_split(dataset, pipeline.test_fraction)
        train_windows = make_windows(split.train, pipeline.model.obs_len, pipeline.model.pred_len, pipeline.window_stride)
        test_windows = make_windows(split.test, pipeline.model.obs_len, pipeline.model.pred_len, pipeline.window_stride)
        heat = build_heat_map_raster(
            split.train.tracks, raster_shape_for(dataset), dataset.meters_per_pixel, pipeline.scene.heat_kernel_std
        )
        cache = save_raster_cache(heat, out / f"{dataset.name}_heat_map.npz")
        summary[dataset.name] = {
            "frame_rate": dataset.frame_rate,
            "tracks": len(dataset.tracks),
            "types": {t.value: n for t, n in dataset.type_counts().items()},
            "boundary_frame": split.boundary_frame,
            "train_windows": len(train_windows),
            "test_windows": len(test_windows),
            "heat_map_cache": str(cache),
        }
    (out / "prepare_summary.yaml").write_text(yaml.safe_dump(summary, sort_keys=False))
    logger.info("Prepared %d dataset(s) into %s", len(summary), out)
    return 0


def cmd_train(args: argparse.Namespace, config: ExperimentConfig) -> int:
    out = config.experiment.output_dir
    pipeline = config.pipeline()
    dataset = _dataset(config, args.dataset)
    split = chronological_split(dataset, pipeline.test_fraction)
    run = prepare_run(split, config.experiment.variant, pipeline)
    result = train(
        None,
        run.train_samples,
        run.train_contexts,
        run.model_config,
        log_path=out / "train_log.csv",
        progress=args.progress,
    )
    contexts = ContextSettings(grid=pipeline.grid, grouping=pipeline.grouping, scene=pipeline.scene)
    digest = save_checkpoint(out / "model.pt", result.model, result.standardizer, run.variant.tag, contexts)
    logger.info("Checkpoint digest %s", digest)
    return 0


def cmd_predict(args: argparse.Namespace, config: ExperimentConfig) -> int:
    predictor, variant, seed, trained_with = _predictor(args)
    dataset = _dataset(config, args.dataset)
    samples, contexts, _ = _test_windows(config, dataset, variant, trained_with)
    seed = config.experiment.seed if seed is None else seed

    rows: List[dict] = []
    for i, (sample, context) in enumerate(zip(samples, contexts)):
        pred = predictor.predict(sample, context, config.model.num_samples, seed=seed + i)
        rows.extend(prediction_rows(pred, sample.dataset, sample.agent_id, sample.last_obs_frame))
    write_predictions(rows, config.experiment.output_dir / "predictions.csv")
    logger.info("Predicted %d windows", len(samples))
    return 0


def cmd_evaluate(args: argparse.Namespace, config: ExperimentConfig) -> int:
    predictor, variant, seed, trained_with = _predictor(args)
    dataset = _dataset(config, args.dataset)
    samples, contexts, _ = _test_windows(config, dataset, variant, trained_with)
    k = config.experiment.k
    result = evaluate(
        predictor,
        samples,
        contexts,
        k=k,
        num_samples=max(k, config.model.num_samples),
        seed=config.experiment.seed if seed is None else seed,
        dataset=dataset.name,
        variant=predictor.name,
    )
    out = config.experiment.output_dir
    write_reports([result.report], out / "metrics.csv")
    write_sample_rows(result.rows, out / "metrics_samples.csv")
    return 0


def cmd_ablate(args: argparse.Namespace, config: ExperimentConfig) -> int:
    dataset = _dataset(config, args.dataset)
    pipeline = config.pipeline()
    split = chronological_split(dataset, pipeline.test_fraction)
    out = config.experiment.output_dir
    reports = run_ablation(split, config.experiment.variants, pipeline, workers=config.experiment.workers, log_dir=out)
    write_reports(reports, out / "ablation.csv")
    return 0


def cmd_loo(args: argparse.Namespace, config: ExperimentConfig) -> int:
    target = args.target or config.data.target
    if target is None:
        raise ConfigError("data.target: a target dataset is required for leave-one-out")
    out = config.experiment.output_dir
    reports = leave_one_out(
        _datasets(config),
        target,
        config.experiment.visibility_rates,
        config.experiment.variant,
        config.pipeline(),
        log_dir=out,
    )
    write_reports(reports, out / f"loo_{target}.csv")
    return 0


def cmd_plot(args: argparse.Namespace, config: ExperimentConfig) -> int:
    predictor, variant, seed, trained_with = _predictor(args)
    dataset = _dataset(config, args.dataset)
    samples, contexts, raster = _test_windows(config, dataset, variant, trained_with)
    samples, contexts = samples[: args.limit], contexts[: args.limit]
    seed = config.experiment.seed if seed is None else seed

    if raster is None:
        try:
            raster = resolve_scene_raster(dataset, args.background, dataset.tracks, config.scene.heat_kernel_std)
        except (FileNotFoundError, RasterShapeError) as e:
            logger.warning("Background raster unavailable: %s", e)

    predictions = [
        predictor.predict(s, c, config.model.num_samples, seed=seed + i)
        for i, (s, c) in enumerate(zip(samples, contexts))
    ]
    emit_plots(predictions, samples, raster, config.experiment.output_dir / "plots", dataset.meters_per_pixel)
    return 0


COMMANDS: Dict[str, Callable[[argparse.Namespace, ExperimentConfig], int]] = {
    "prepare": cmd_prepare,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
    "loo": cmd_loo,
    "plot": cmd_plot,
}


# --------------------------------------------------------------------- #
# parser
# --------------------------------------------------------------------- #

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML experiment file")
    common.add_argument("--manifest", action="append", default=[], help="dataset manifest (repeatable)")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a config value (repeatable, last wins)")
    common.add_argument("--output-dir", type=Path)
    common.add_argument("--seed", type=int)
    common.add_argument("--variant")
    common.add_argument("--dataset", help="dataset name when several manifests are given")
    common.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    parser = argparse.ArgumentParser(prog="mcenet", description="Multi-context trajectory prediction experiments")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{" + ",".join(COMMANDS) + "}")

    sub.add_parser("prepare", parents=[common], help="split, window and cache heat maps")
    train_p = sub.add_parser("train", parents=[common], help="train one variant")
    train_p.add_argument("--progress", action="store_true")

    for name, text in (("predict", "write sampled trajectories"), ("evaluate", "ADE/FDE on the test split"),
                       ("plot", "draw prediction fans")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--checkpoint", type=Path)
        p.add_argument("--predictor", choices=["mcenet", "cv"], default="mcenet")
        if name == "plot":
            p.add_argument("--limit", type=int, default=10)
            p.add_argument("--background", choices=[k.value for k in RasterKind], default=RasterKind.AERIAL.value)

    sub.add_parser("ablate", parents=[common], help="train and evaluate every variant")
    loo_p = sub.add_parser("loo", parents=[common], help="leave-one-out with visibility rates")
    loo_p.add_argument("--target")
    return parser


def _overrides(args: argparse.Namespace) -> List[str]:
    overrides = list(args.overrides)
    if args.manifest:
        overrides.append(f"data.manifests={yaml.safe_dump([str(m) for m in args.manifest], default_flow_style=True).strip()}")
    if args.output_dir is not None:
        overrides.append(f"experiment.output_dir={args.output_dir}")
    if args.seed is not None:
        overrides.append(f"experiment.seed={args.seed}")
    if args.variant is not None:
        overrides.append(f"experiment.variant={args.variant}")
    return overrides


def run_cli(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand; returns 0 on success, 1 on a user error, 2 on a usage error."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else 2

    logging.basicConfig(level=args.log_level, format=LOG_FORMAT, force=True)
    try:
        config = load_config(args.config, _overrides(args))
        write_resolved_config(config, config.experiment.output_dir)
        return COMMANDS[args.command](args, config)
    except _USER_ERRORS as e:
        logger.error("%s: %s", type(e).__name__, e)
        return 1


def main() -> None:
    sys.exit(run_cli())
