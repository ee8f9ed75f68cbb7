"""Static overlays of predicted trajectory fans on scene rasters."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from mcenet.context.raster import SceneRaster, world_to_pixel  # noqa: E402
from mcenet.dataio.schemas import TrainingSample  # noqa: E402
from mcenet.model.inference import PredictionSet  # noqa: E402

logger = logging.getLogger(__name__)

PAST_COLOR = "black"
TRUTH_COLOR = "purple"


def plot_filename(sample: TrainingSample) -> str:
    return f"{sample.dataset}_{sample.last_obs_frame}_{sample.agent_id}.png"


def draw_window(
    ax,
    pred: PredictionSet,
    sample: TrainingSample,
    raster: SceneRaster | None,
    meters_per_pixel: float,
) -> None:
    """Draw one window on ``ax`` in raster pixel coordinates."""
    if raster is not None:
        background = raster.pixels if raster.channels == 3 else raster.pixels.max(axis=-1)
        ax.imshow(background, cmap=None if raster.channels == 3 else "gray", origin="upper")
    else:
        ax.set_facecolor("white")
        ax.invert_yaxis()

    for n, trajectory in enumerate(pred.trajectories):
        path = world_to_pixel(np.vstack([sample.anchor, trajectory]), meters_per_pixel)
        best = n == pred.most_likely_index
        ax.plot(path[:, 0], path[:, 1], color="tab:orange" if best else "tab:blue",
                alpha=1.0 if best else 0.35, linewidth=2.0 if best else 1.0)

    past = world_to_pixel(sample.obs_positions, meters_per_pixel)
    truth = world_to_pixel(np.vstack([sample.anchor, sample.fut_positions]), meters_per_pixel)
    ax.plot(past[:, 0], past[:, 1], color=PAST_COLOR, marker="o", markersize=2, label="past")
    ax.plot(truth[:, 0], truth[:, 1], color=TRUTH_COLOR, marker="o", markersize=2, label="ground truth")
    ax.set_title(f"{sample.dataset} frame {sample.last_obs_frame} agent {sample.agent_id}")
    ax.legend(loc="upper right", fontsize="small")


def emit_plots(
    predictions: Sequence[PredictionSet],
    samples: Sequence[TrainingSample],
    raster: SceneRaster | None,
    output_dir: str | Path,
    meters_per_pixel: float | None = None,
) -> List[Path]:
    """One image per window: past in black, ground truth in purple, the sample fan on top.

    Coordinates are drawn in raster pixels (``world / meters_per_pixel``, rounded).
    Without a raster the background is blank and a warning is logged.
    """
    if len(predictions) != len(samples):
        raise ValueError(f"{len(predictions)} predictions but {len(samples)} samples")
    if raster is None:
        if meters_per_pixel is None:
            raise ValueError("meters_per_pixel is required when no raster is given")
        logger.warning("No raster available; plotting on a blank background")
    mpp = raster.meters_per_pixel if raster is not None else meters_per_pixel

    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []

    for pred, sample in zip(predictions, samples):
        fig, ax = plt.subplots(figsize=(6, 6))
        draw_window(ax, pred, sample, raster, mpp)
        target = output_dir / plot_filename(sample)
        fig.savefig(target, dpi=100)
        plt.close(fig)
        written.append(target)

    logger.info("Wrote %d plots to %s", len(written), output_dir)
    return written
