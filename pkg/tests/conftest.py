from typing import Sequence

import numpy as np
import pytest

from mcenet.dataio import AgentTrack, AgentType, SceneDataset, make_constant_velocity_dataset


def _straight_track(
    agent_id: int,
    length: int,
    start_frame: int = 0,
    origin=(0.0, 0.0),
    velocity=(1.0, 0.0),
    agent_type: AgentType = AgentType.PEDESTRIAN,
) -> AgentTrack:
    steps = np.arange(length)[:, None]
    return AgentTrack(
        agent_id=agent_id,
        agent_type=agent_type,
        frames=np.arange(start_frame, start_frame + length),
        positions=np.asarray(origin, dtype=float) + steps * np.asarray(velocity, dtype=float),
    )


def _dataset_of(tracks: Sequence[AgentTrack], name: str = "scene", **kwargs) -> SceneDataset:
    params = {"frame_rate": 2.0, "meters_per_pixel": 0.5}
    params.update(kwargs)
    return SceneDataset(name=name, tracks=list(tracks), **params)


@pytest.fixture()
def straight_track():
    """Factory for constant-velocity tracks on consecutive frames."""
    return _straight_track


@pytest.fixture()
def dataset_of():
    """Factory wrapping tracks into a 2 fps dataset at 0.5 m per pixel."""
    return _dataset_of


@pytest.fixture()
def noiseless_dataset() -> SceneDataset:
    """Straight-line agents with constant speed; constant-velocity extrapolation is exact."""
    return make_constant_velocity_dataset(40, name="noiseless", num_frames=120, speed_noise=0.0, seed=3)


@pytest.fixture()
def small_dataset() -> SceneDataset:
    return make_constant_velocity_dataset(30, name="small", num_frames=100, seed=5)
