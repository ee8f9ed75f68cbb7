"""Training runs on synthetic constant-velocity scenes. Minutes on a laptop CPU."""

import numpy as np
import pytest
from PIL import Image

from mcenet.context import SceneConfig
from mcenet.dataio import chronological_split, make_constant_velocity_dataset
from mcenet.evaluation import PipelineConfig, leave_one_out, prepare_run, run_ablation, train_and_evaluate
from mcenet.model import ModelConfig

pytestmark = pytest.mark.slow

SMALL_MODEL = ModelConfig(
    epochs=2,
    batch_size=64,
    conv1d_channels=8,
    lstm_hidden=16,
    fusion_dim=16,
    latent_dim=4,
    cnn_channels=(4, 8, 8),
)

ACCURATE_MODEL = ModelConfig(
    epochs=200,
    learning_rate=3e-3,
    lr_schedule="cosine",
    lr_min=1e-5,
    grad_clip=1.0,
    kl_weight=1e-4,
    seed=0,
)


def _with_scene_files(dataset, tmp_path):
    """Attach a noise aerial photo and a mask with a walkable horizontal band."""
    rows, cols = dataset.raster_shape
    rng = np.random.default_rng(0)
    aerial = tmp_path / f"{dataset.name}_aerial.png"
    Image.fromarray(rng.integers(0, 256, size=(rows, cols, 3), dtype=np.uint8)).save(aerial)
    mask = np.zeros((rows, cols), dtype=np.uint8)
    mask[rows // 4: 3 * rows // 4] = 255
    segmented = tmp_path / f"{dataset.name}_walkable.png"
    Image.fromarray(mask).save(segmented)
    return dataset.with_tracks(dataset.tracks, rasters={"aerial": [aerial], "segmented": [segmented]})


# --------------------------------------------------------------------- #
# ACCURACY
# --------------------------------------------------------------------- #

def test_learns_constant_velocity_to_the_noise_floor():
    """With 0.05 m/step speed noise, best-of-10 ADE stays under 0.10 m and most-likely under 0.20 m.

    The KL weight is on the scale of the offset noise variance, so samples spread along track.
    """
    dataset = make_constant_velocity_dataset(200, seed=0)
    config = PipelineConfig(model=ACCURATE_MODEL)
    run = prepare_run(chronological_split(dataset, config.test_fraction), "gp", config)
    result, evaluation = train_and_evaluate(run, config, dataset.name)

    assert result.history[-1].mse < result.history[0].mse
    report = evaluation.report
    assert report.k == 10
    assert report.ade_best_of_k < 0.10
    assert report.ade_most_likely < 0.20
    assert report.ade_best_of_k <= report.ade_most_likely


# --------------------------------------------------------------------- #
# EXPERIMENT MATRIX
# --------------------------------------------------------------------- #

def test_ablation_covers_every_variant(tmp_path):
    dataset = _with_scene_files(make_constant_velocity_dataset(60, num_frames=120, seed=1), tmp_path)
    config = PipelineConfig(model=SMALL_MODEL, scene=SceneConfig(input_size=16))
    tags = ["baseline", "gp", "hm", "hm+gp", "ap+gp", "sm+gp"]

    reports = run_ablation(chronological_split(dataset, 0.3), tags, config, log_dir=tmp_path)

    assert [r.variant for r in reports] == tags
    assert len({r.sample_count for r in reports}) == 1
    assert all(np.isfinite(r.ade_most_likely) for r in reports)
    assert (tmp_path / "train_sm+gp.csv").exists()


def test_leave_one_out_reports_each_rate(tmp_path):
    datasets = [
        make_constant_velocity_dataset(40, name=name, num_frames=120, seed=seed)
        for seed, name in enumerate(["hbs", "hc", "gates"])
    ]
    config = PipelineConfig(model=SMALL_MODEL, scene=SceneConfig(input_size=16), fine_tune_epochs=1, test_fraction=0.3)

    reports = leave_one_out(datasets, "gates", [0.0, 0.5, 1.0], "hm+gp", config, log_dir=tmp_path)

    assert [r.visibility_rate for r in reports] == [0.0, 0.5, 1.0]
    assert all(r.dataset == "gates" and r.variant == "hm+gp" for r in reports)
    assert len({r.sample_count for r in reports}) == 1
    assert (tmp_path / "loo_gates_source.csv").exists()
