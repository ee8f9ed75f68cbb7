"""Synthetic constant-velocity scenes for smoke tests and acceptance runs."""

from __future__ import annotations

from typing import Dict, Tuple

import numpy as np

from .schemas import AgentTrack, AgentType, SceneDataset

# Speed ranges in meters per step at 2 fps.
SPEED_RANGES: Dict[AgentType, Tuple[float, float]] = {
    AgentType.PEDESTRIAN: (0.5, 0.8),
    AgentType.CYCLIST: (1.0, 1.5),
    AgentType.VEHICLE: (1.5, 2.5),
}


def make_constant_velocity_dataset(
    num_agents: int = 200,
    *,
    name: str = "synthetic",
    num_frames: int = 240,
    track_length: Tuple[int, int] = (20, 32),
    speed_noise: float = 0.05,
    meters_per_pixel: float = 0.5,
    extent_m: float = 220.0,
    seed: int = 0,
) -> SceneDataset:
    """Straight-line agents of all three types with Gaussian speed noise.

    Each agent keeps a fixed heading; its per-step displacement along that heading
    is its base speed plus ``N(0, speed_noise)``. Start points lie in the middle of
    the scene so paths stay inside ``[0, extent_m]``.
    """
    rng = np.random.default_rng(seed)
    types = list(AgentType)
    lo, hi = track_length
    center_lo, center_hi = 0.4 * extent_m, 0.6 * extent_m

    tracks = []
    for agent_id in range(num_agents):
        agent_type = types[agent_id % len(types)]
        length = int(rng.integers(lo, hi + 1))
        start = int(rng.integers(0, max(1, num_frames - length)))
        speed = rng.uniform(*SPEED_RANGES[agent_type])
        heading = rng.uniform(-np.pi, np.pi)
        direction = np.array([np.cos(heading), np.sin(heading)])

        steps = speed + rng.normal(0.0, speed_noise, size=length - 1) if speed_noise > 0 else np.full(length - 1, speed)
        origin = rng.uniform(center_lo, center_hi, size=2)
        distances = np.concatenate([[0.0], np.cumsum(steps)])
        positions = origin + distances[:, None] * direction

        tracks.append(
            AgentTrack(
                agent_id=agent_id,
                agent_type=agent_type,
                frames=np.arange(start, start + length),
                positions=positions,
            )
        )

    side = int(np.ceil(extent_m / meters_per_pixel))
    return SceneDataset(
        name=name,
        frame_rate=2.0,
        meters_per_pixel=meters_per_pixel,
        tracks=tracks,
        raster_shape=(side, side),
    )
