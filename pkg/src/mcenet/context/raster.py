"""Scene rasters: heat maps, aerial photographs and segmented maps."""

from __future__ import annotations

import logging
from enum import StrEnum
from pathlib import Path
from typing import List, Literal, Sequence, Tuple

import numpy as np
from PIL import Image
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.ndimage import gaussian_filter

from mcenet.dataio.schemas import AgentTrack, AgentType, SceneDataset, TrainingSample

logger = logging.getLogger(__name__)


class RasterShapeError(ValueError):
    """Raised when a raster does not match the shape its manifest declares."""


class RasterKind(StrEnum):
    HEAT_MAP = "heat_map"
    AERIAL = "aerial"
    SEGMENTED = "segmented"


class SceneConfig(BaseModel):
    """How rasters are fed to the network.

    ``static`` resizes the whole raster to ``input_size`` once; ``per_step_crop``
    cuts a ``crop_size_m`` square around the agent at every step.
    """

    mode: Literal["static", "per_step_crop"] = "static"
    input_size: int = Field(default=64, ge=8)
    crop_size_m: float = Field(default=16.0, gt=0)
    heat_kernel_std: float = Field(default=3.0, gt=0)


class SceneRaster(BaseModel):
    """``(H, W, C)`` raster with values in ``[0, 1]``, georeferenced by ``meters_per_pixel``.

    World ``(x, y)`` maps to pixel column ``round(x / mpp)`` and row ``round(y / mpp)``.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: RasterKind
    pixels: np.ndarray
    meters_per_pixel: float = Field(gt=0)

    @field_validator("pixels", mode="before")
    @classmethod
    def _as_hwc(cls, v):
        arr = np.asarray(v, dtype=np.float32)
        return arr[..., None] if arr.ndim == 2 else arr

    @model_validator(mode="after")
    def _check_values(self):
        if self.pixels.ndim != 3 or min(self.pixels.shape) < 1:
            raise ValueError(f"Raster pixels must be H x W x C, got shape {self.pixels.shape}")
        if np.any(self.pixels < 0) or np.any(self.pixels > 1):
            raise ValueError(f"{self.kind} raster values must lie in [0, 1]")
        if self.kind == RasterKind.SEGMENTED and not np.all(np.isin(self.pixels, (0.0, 1.0))):
            raise ValueError("Segmented raster channels must be binary")
        return self

    @property
    def shape(self) -> Tuple[int, int]:
        return self.pixels.shape[0], self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]


def world_to_pixel(points: np.ndarray, meters_per_pixel: float) -> np.ndarray:
    """World meters -> integer ``(col, row)`` pixel indices."""
    return np.rint(np.asarray(points, dtype=np.float64) / meters_per_pixel).astype(np.int64)


# --------------------------------------------------------------------- #
# file rasters
# --------------------------------------------------------------------- #

def load_raster(
    path: str | Path,
    kind: RasterKind | str,
    meters_per_pixel: float,
    expected_shape: Tuple[int, int] | None = None,
) -> SceneRaster:
    """Decode an image raster and rescale it to ``[0, 1]``.

    Aerial photographs become 3 channels; heat maps and segmented masks are read as
    grayscale, and segmented masks are thresholded at 0.5.
    """
    kind = RasterKind(kind)
    with Image.open(path) as img:
        if kind == RasterKind.AERIAL:
            img = img.convert("RGB")
        elif img.mode not in ("L", "I;16", "I", "F"):
            img = img.convert("L")
        raw = np.asarray(img)

    if raw.dtype == np.uint8:
        pixels = raw.astype(np.float32) / 255.0
    elif raw.dtype == np.uint16 or img.mode.startswith("I"):
        pixels = raw.astype(np.float32) / 65535.0
    else:
        pixels = np.clip(raw.astype(np.float32), 0.0, 1.0)

    if kind == RasterKind.SEGMENTED:
        pixels = (pixels >= 0.5).astype(np.float32)

    if expected_shape is not None and tuple(pixels.shape[:2]) != tuple(expected_shape):
        raise RasterShapeError(
            f"{path}: raster is {pixels.shape[0]}x{pixels.shape[1]}, manifest declares "
            f"{expected_shape[0]}x{expected_shape[1]}"
        )
    return SceneRaster(kind=kind, pixels=pixels, meters_per_pixel=meters_per_pixel)


def stack_rasters(rasters: Sequence[SceneRaster]) -> SceneRaster:
    """Concatenate the channels of same-kind, same-shape rasters."""
    if not rasters:
        raise ValueError("Nothing to stack")
    first = rasters[0]
    for r in rasters[1:]:
        if r.kind != first.kind or r.shape != first.shape or r.meters_per_pixel != first.meters_per_pixel:
            raise RasterShapeError("Stacked rasters must share kind, shape and meters_per_pixel")
    return SceneRaster(
        kind=first.kind,
        pixels=np.concatenate([r.pixels for r in rasters], axis=-1),
        meters_per_pixel=first.meters_per_pixel,
    )


def save_raster_cache(raster: SceneRaster, path: str | Path) -> Path:
    """Write a raster as ``.npz`` with a small header (shape, dtype, kind, meters_per_pixel)."""
    path = Path(path).with_suffix(".npz")
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(
        path,
        pixels=raster.pixels,
        shape=np.asarray(raster.pixels.shape, dtype=np.int64),
        dtype=np.asarray(str(raster.pixels.dtype)),
        kind=np.asarray(raster.kind.value),
        meters_per_pixel=np.asarray(raster.meters_per_pixel, dtype=np.float64),
    )
    return path


def load_raster_cache(path: str | Path) -> SceneRaster:
    with np.load(path, allow_pickle=False) as data:
        pixels = data["pixels"].astype(str(data["dtype"]))
        if tuple(pixels.shape) != tuple(data["shape"]):
            raise RasterShapeError(f"{path}: header shape {tuple(data['shape'])} != {pixels.shape}")
        return SceneRaster(
            kind=RasterKind(str(data["kind"])),
            pixels=pixels,
            meters_per_pixel=float(data["meters_per_pixel"]),
        )


# --------------------------------------------------------------------- #
# heat maps
# --------------------------------------------------------------------- #

def build_heat_map(
    train_tracks: Sequence[AgentTrack],
    agent_type: AgentType,
    raster_shape: Tuple[int, int],
    meters_per_pixel: float,
    kernel_std_pixels: float = 3.0,
    normalize: bool = True,
) -> np.ndarray:
    """Gaussian-blurred visit counts of one agent type as an ``(H, W)`` channel.

    Only pass training-split tracks. Visits are accumulated as integers before the
    blur, so the result does not depend on track order. With ``normalize`` the peak
    is scaled to 1.
    """
    height, width = raster_shape
    if height <= 0 or width <= 0:
        raise ValueError(f"Raster shape must be positive, got {raster_shape}")
    if kernel_std_pixels <= 0:
        raise ValueError(f"kernel_std_pixels must be positive, got {kernel_std_pixels}")

    counts = np.zeros((height, width), dtype=np.int64)
    selected = [t for t in train_tracks if t.agent_type == agent_type]
    if not selected:
        logger.warning("No training tracks of type %s; heat-map channel is all zero", agent_type.value)
        return counts.astype(np.float64)

    pixels = world_to_pixel(np.concatenate([t.positions for t in selected]), meters_per_pixel)
    cols, rows = pixels[:, 0], pixels[:, 1]
    inside = (rows >= 0) & (rows < height) & (cols >= 0) & (cols < width)
    np.add.at(counts, (rows[inside], cols[inside]), 1)

    heat = gaussian_filter(counts.astype(np.float64), sigma=kernel_std_pixels, mode="constant")
    if normalize and heat.max() > 0:
        heat = heat / heat.max()
    return heat


def build_heat_map_raster(
    train_tracks: Sequence[AgentTrack],
    raster_shape: Tuple[int, int],
    meters_per_pixel: float,
    kernel_std_pixels: float = 3.0,
) -> SceneRaster:
    """One heat-map channel per agent type, in ``AgentType`` order."""
    channels = [
        build_heat_map(train_tracks, t, raster_shape, meters_per_pixel, kernel_std_pixels) for t in AgentType
    ]
    pixels = np.clip(np.stack(channels, axis=-1), 0.0, 1.0)
    return SceneRaster(kind=RasterKind.HEAT_MAP, pixels=pixels, meters_per_pixel=meters_per_pixel)


def raster_shape_for(dataset: SceneDataset) -> Tuple[int, int]:
    """Declared raster shape, or one covering every track position."""
    if dataset.raster_shape is not None:
        return dataset.raster_shape
    if not dataset.tracks:
        raise ValueError(f"Dataset '{dataset.name}' has no tracks to size a raster from")
    extent = np.max(np.concatenate([t.positions for t in dataset.tracks]), axis=0)
    cols, rows = world_to_pixel(np.maximum(extent, 0.0), dataset.meters_per_pixel) + 1
    return int(rows), int(cols)


def resolve_scene_raster(
    dataset: SceneDataset,
    kind: RasterKind | str,
    train_tracks: Sequence[AgentTrack],
    kernel_std_pixels: float = 3.0,
) -> SceneRaster:
    """Raster of ``kind`` for a dataset.

    Heat maps come from a cached ``.npz`` named in the manifest or are built from
    ``train_tracks``; aerial and segmented rasters are read from the manifest's files.
    """
    kind = RasterKind(kind)
    paths: List[Path] = list(dataset.rasters.get(kind.value, []))

    if kind == RasterKind.HEAT_MAP:
        if paths:
            return load_raster_cache(paths[0])
        return build_heat_map_raster(
            train_tracks, raster_shape_for(dataset), dataset.meters_per_pixel, kernel_std_pixels
        )

    if not paths:
        raise FileNotFoundError(f"Dataset '{dataset.name}' names no {kind.value} raster in its manifest")
    rasters = [load_raster(p, kind, dataset.meters_per_pixel, dataset.raster_shape) for p in paths]
    return stack_rasters(rasters) if len(rasters) > 1 else rasters[0]


# --------------------------------------------------------------------- #
# model inputs
# --------------------------------------------------------------------- #

def resize_pixels(pixels: np.ndarray, size: Tuple[int, int]) -> np.ndarray:
    """Box-filter resize of an ``(H, W, C)`` float array to ``size = (h, w)``."""
    h, w = size
    if pixels.shape[:2] == (h, w):
        return pixels.astype(np.float32, copy=False)
    channels = [
        np.asarray(Image.fromarray(np.ascontiguousarray(pixels[..., c], dtype=np.float32)).resize(
            (w, h), Image.Resampling.BOX
        ))
        for c in range(pixels.shape[2])
    ]
    return np.clip(np.stack(channels, axis=-1), 0.0, 1.0)


def crop_at(raster: SceneRaster, position: np.ndarray, side: int) -> np.ndarray:
    """``side x side`` crop centred on ``position``; outside the raster is 0."""
    col, row = world_to_pixel(position, raster.meters_per_pixel)
    half = side // 2
    r0, c0 = row - half, col - half
    height, width = raster.shape

    crop = np.zeros((side, side, raster.channels), dtype=np.float32)
    src_r = slice(max(r0, 0), min(r0 + side, height))
    src_c = slice(max(c0, 0), min(c0 + side, width))
    if src_r.start >= src_r.stop or src_c.start >= src_c.stop:
        return crop
    crop[src_r.start - r0:src_r.stop - r0, src_c.start - c0:src_c.stop - c0] = raster.pixels[src_r, src_c]
    return crop


def scene_tensor(
    raster: SceneRaster,
    sample: TrainingSample | None = None,
    mode: Literal["static", "per_step_crop"] = "static",
    crop_size_m: float = 16.0,
    output_size: Tuple[int, int] | None = None,
    horizon: Literal["observed", "future"] = "observed",
) -> np.ndarray:
    """Scene input for one sample.

    ``static`` returns ``(1, h, w, C)``: the whole raster resized to ``output_size``
    and shared by every step. ``per_step_crop`` returns ``(S, h, w, C)``: one crop
    around the agent per observed (or future) step, zero-padded at the borders.
    """
    if mode == "static":
        size = output_size or raster.shape
        return resize_pixels(raster.pixels, size)[None]

    if sample is None:
        raise ValueError("per_step_crop needs a sample")
    positions = sample.obs_positions if horizon == "observed" else sample.fut_positions
    side = max(1, int(round(crop_size_m / raster.meters_per_pixel)))
    crops = [crop_at(raster, p, side) for p in positions]
    if output_size is not None:
        crops = [resize_pixels(c, output_size) for c in crops]
    return np.stack(crops)
