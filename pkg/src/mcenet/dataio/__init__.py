"""Trajectory datasets: parsing, resampling, splitting and sliding windows."""

from .schemas import AgentTrack, AgentType, SceneDataset, SplitResult, TrainingSample
from .readers import (
    DatasetManifest,
    TrajectoryFormat,
    TrajectoryParseError,
    load_dataset,
    load_from_manifest,
    load_manifest,
    serialize_dataset,
)
from .windows import (
    ResampleError,
    chronological_split,
    encode_agent_type,
    make_windows,
    offsets_to_positions,
    positions_to_offsets,
    resample,
    subset_frames,
)
from .synthetic import make_constant_velocity_dataset

__all__ = [
    "AgentTrack",
    "AgentType",
    "SceneDataset",
    "SplitResult",
    "TrainingSample",
    "DatasetManifest",
    "TrajectoryFormat",
    "TrajectoryParseError",
    "load_dataset",
    "load_from_manifest",
    "load_manifest",
    "serialize_dataset",
    "ResampleError",
    "chronological_split",
    "encode_agent_type",
    "make_windows",
    "offsets_to_positions",
    "positions_to_offsets",
    "resample",
    "subset_frames",
    "make_constant_velocity_dataset",
]
