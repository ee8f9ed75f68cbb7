"""Resampling, chronological splits, sliding windows and offset conversion."""

from __future__ import annotations

import logging
import math
from typing import List

import numpy as np

from .schemas import AgentTrack, AgentType, SceneDataset, SplitResult, TrainingSample

logger = logging.getLogger(__name__)


class ResampleError(ValueError):
    """Raised when the source frame rate is not an integer multiple of the target rate."""


# --------------------------------------------------------------------- #
# offsets
# --------------------------------------------------------------------- #

def positions_to_offsets(positions: np.ndarray) -> np.ndarray:
    """Consecutive differences of a ``(K, 2)`` position sequence -> ``(K-1, 2)``."""
    positions = np.asarray(positions, dtype=np.float64)
    if positions.ndim != 2 or positions.shape[0] < 2:
        raise ValueError(f"Need at least 2 positions to compute offsets, got shape {positions.shape}")
    return np.diff(positions, axis=0)


def offsets_to_positions(origin: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Cumulative sum of ``(K, 2)`` offsets starting from ``origin`` -> ``(K, 2)`` positions.

    ``origin`` itself is not part of the output.
    """
    origin = np.asarray(origin, dtype=np.float64).reshape(1, 2)
    offsets = np.asarray(offsets, dtype=np.float64).reshape(-1, 2)
    return origin + np.cumsum(offsets, axis=0)


def encode_agent_type(agent_type: AgentType | str) -> np.ndarray:
    """One-hot ``(pedestrian, cyclist, vehicle)`` vector."""
    if not isinstance(agent_type, AgentType):
        if not isinstance(agent_type, str):
            raise ValueError(f"Cannot encode agent type {agent_type!r}")
        agent_type = AgentType.parse(agent_type)
    onehot = np.zeros(len(AgentType), dtype=np.float64)
    onehot[agent_type.index] = 1.0
    return onehot


# --------------------------------------------------------------------- #
# dataset transforms
# --------------------------------------------------------------------- #

def resample(dataset: SceneDataset, target_fps: float) -> SceneDataset:
    """Keep every ``frame_rate / target_fps``-th sample of each track.

    No interpolation is done; the stride starts at each track's first sample.
    """
    if target_fps <= 0:
        raise ResampleError(f"target_fps must be positive, got {target_fps}")

    ratio = dataset.frame_rate / target_fps
    stride = int(round(ratio))
    if stride < 1 or not math.isclose(ratio, stride, rel_tol=0.0, abs_tol=1e-9):
        raise ResampleError(
            f"Cannot resample '{dataset.name}' from {dataset.frame_rate} to {target_fps} fps: "
            f"ratio {ratio:g} is not an integer"
        )
    if stride == 1:
        return dataset

    tracks = [
        AgentTrack(
            agent_id=t.agent_id,
            agent_type=t.agent_type,
            frames=t.frames[::stride],
            positions=t.positions[::stride],
        )
        for t in dataset.tracks
    ]
    logger.debug("Resampled %s with stride %d", dataset.name, stride)
    return dataset.with_tracks(tracks, frame_rate=float(target_fps))


def subset_frames(dataset: SceneDataset, lo: int | None = None, hi: int | None = None) -> SceneDataset:
    """Dataset view holding only samples with ``lo <= frame < hi``."""
    tracks = [seg for t in dataset.tracks if (seg := t.segment(lo, hi)) is not None]
    return dataset.with_tracks(tracks)


def chronological_split(dataset: SceneDataset, test_fraction: float) -> SplitResult:
    """Split the timeline: the earliest ``test_fraction`` is test, the remainder is train.

    Tracks crossing the boundary are cut in two, so no window can straddle it.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")

    first, last = dataset.frame_bounds()
    boundary = int(round(first + test_fraction * (last - first + 1)))

    split = SplitResult(
        train=subset_frames(dataset, lo=boundary),
        test=subset_frames(dataset, hi=boundary),
        boundary_frame=boundary,
    )
    logger.info(
        "Split %s at frame %d: %d test tracks, %d train tracks",
        dataset.name, boundary, len(split.test.tracks), len(split.train.tracks),
    )
    return split


def make_windows(
    dataset: SceneDataset,
    T: int = 8,
    T_prime: int = 8,
    stride: int = 1,
) -> List[TrainingSample]:
    """Cut every track into ``T + T_prime`` windows advancing by ``stride``.

    A window must cover evenly spaced frames; windows across a gap in a track are
    skipped. Tracks shorter than ``T + T_prime`` yield nothing.
    """
    if T < 2 or T_prime < 1 or stride < 1:
        raise ValueError(f"Invalid window configuration T={T}, T_prime={T_prime}, stride={stride}")

    span = T + T_prime
    samples: List[TrainingSample] = []

    for track in dataset.tracks:
        length = len(track)
        if length < span:
            continue

        steps = np.diff(track.frames)
        base_step = steps.min() if len(steps) else 1
        onehot = encode_agent_type(track.agent_type)

        for start in range(0, length - span + 1, stride):
            if np.any(steps[start:start + span - 1] != base_step):
                continue
            samples.append(_cut_window(dataset, track, start, T, T_prime, onehot))

    return samples


def _cut_window(
    dataset: SceneDataset,
    track: AgentTrack,
    start: int,
    T: int,
    T_prime: int,
    onehot: np.ndarray,
) -> TrainingSample:
    frames = track.frames[start:start + T + T_prime]
    positions = track.positions[start:start + T + T_prime]
    obs, fut = positions[:T], positions[T:]

    neighbors = tuple(
        frozenset(a for a in dataset.agents_at(int(f)) if a != track.agent_id) for f in frames
    )

    return TrainingSample(
        dataset=dataset.name,
        agent_id=track.agent_id,
        agent_type=track.agent_type,
        type_onehot=onehot,
        obs_frames=frames[:T].copy(),
        fut_frames=frames[T:].copy(),
        obs_positions=obs.copy(),
        fut_positions=fut.copy(),
        obs_offsets=positions_to_offsets(obs),
        fut_offsets=positions_to_offsets(positions[T - 1:]),
        neighbor_ids_per_step=neighbors,
    )

