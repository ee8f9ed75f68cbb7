"""Core trajectory records: tracks, scene datasets, windows and splits."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path
from typing import Dict, Iterator, List, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator
from sortedcontainers import SortedDict

RasterKey = Literal["heat_map", "aerial", "segmented"]

# Labels seen in public recordings that map onto the three agent classes.
_TYPE_ALIASES = {
    "biker": "cyclist",
    "bicycle": "cyclist",
    "car": "vehicle",
}


class AgentType(StrEnum):
    PEDESTRIAN = "pedestrian"
    CYCLIST = "cyclist"
    VEHICLE = "vehicle"

    @classmethod
    def parse(cls, token: str) -> AgentType:
        """Parse a type token, case-insensitively."""
        key = token.strip().lower()
        key = _TYPE_ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"Unknown agent type '{token}'. Expected one of {[t.value for t in cls]}.")

    @property
    def index(self) -> int:
        return list(AgentType).index(self)


class AgentTrack(BaseModel):
    """One agent's typed, time-stamped path in world coordinates (meters).

    Args:
    - **agent_id**: unique integer id inside its dataset.
    - **agent_type**: pedestrian, cyclist or vehicle.
    - **frames**: ``(K,)`` strictly increasing frame ids.
    - **positions**: ``(K, 2)`` world positions in meters.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    agent_id: int
    agent_type: AgentType
    frames: np.ndarray
    positions: np.ndarray

    @field_validator("frames", mode="before")
    @classmethod
    def _as_frame_array(cls, v):
        return np.asarray(v, dtype=np.int64).reshape(-1)

    @field_validator("positions", mode="before")
    @classmethod
    def _as_position_array(cls, v):
        return np.asarray(v, dtype=np.float64).reshape(-1, 2)

    @model_validator(mode="after")
    def _check_samples(self):
        if len(self.frames) < 1:
            raise ValueError(f"Track {self.agent_id} has no samples")
        if len(self.frames) != len(self.positions):
            raise ValueError(
                f"Track {self.agent_id}: {len(self.frames)} frames but {len(self.positions)} positions"
            )
        if np.any(np.diff(self.frames) <= 0):
            raise ValueError(f"Track {self.agent_id}: frame ids must be strictly increasing")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError(f"Track {self.agent_id}: positions must be finite")
        return self

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def samples(self) -> List[Tuple[int, float, float]]:
        return [(int(f), float(x), float(y)) for f, (x, y) in zip(self.frames, self.positions)]

    def segment(self, lo: int | None = None, hi: int | None = None) -> AgentTrack | None:
        """Return the part of the track with ``lo <= frame < hi`` or ``None`` when empty."""
        mask = np.ones(len(self.frames), dtype=bool)
        if lo is not None:
            mask &= self.frames >= lo
        if hi is not None:
            mask &= self.frames < hi
        if not mask.any():
            return None
        return AgentTrack(
            agent_id=self.agent_id,
            agent_type=self.agent_type,
            frames=self.frames[mask],
            positions=self.positions[mask],
        )


class SceneDataset(BaseModel):
    """A recorded scene: typed tracks plus georeferencing and optional raster files.

    Keeps a frame index (``frame_id -> {agent_id: position}``) for co-presence
    queries; it is rebuilt on construction, so derive new datasets with
    ``with_tracks`` rather than mutating ``tracks``.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    frame_rate: float = Field(gt=0)
    meters_per_pixel: float = Field(default=1.0, gt=0)
    tracks: List[AgentTrack]
    raster_shape: Tuple[int, int] | None = None
    rasters: Dict[RasterKey, List[Path]] = Field(default_factory=dict)

    _frame_index: SortedDict = PrivateAttr(default_factory=SortedDict)
    _by_id: Dict[int, AgentTrack] = PrivateAttr(default_factory=dict)

    def model_post_init(self, __context):
        index: SortedDict = SortedDict()
        for track in self.tracks:
            for frame, position in zip(track.frames, track.positions):
                index.setdefault(int(frame), {})[track.agent_id] = position
        self._frame_index = index
        self._by_id = {track.agent_id: track for track in self.tracks}

    @model_validator(mode="after")
    def _check_unique_ids(self):
        ids = [t.agent_id for t in self.tracks]
        dupes = sorted(i for i, c in Counter(ids).items() if c > 1)
        if dupes:
            raise ValueError(f"Dataset '{self.name}' has duplicate agent ids: {dupes}")
        return self

    @property
    def frame_index(self) -> SortedDict:
        return self._frame_index

    @property
    def frames(self) -> List[int]:
        return list(self._frame_index.keys())

    def frame_bounds(self) -> Tuple[int, int]:
        if not self._frame_index:
            raise ValueError(f"Dataset '{self.name}' is empty")
        return self._frame_index.keys()[0], self._frame_index.keys()[-1]

    def track(self, agent_id: int) -> AgentTrack:
        return self._by_id[agent_id]

    def agents_at(self, frame: int) -> Dict[int, np.ndarray]:
        return self._frame_index.get(int(frame), {})

    def iter_frames(self, lo: int, hi: int) -> Iterator[Tuple[int, Dict[int, np.ndarray]]]:
        """Iterate ``(frame, agents)`` for ``lo <= frame < hi`` in frame order."""
        for frame in self._frame_index.irange(lo, hi, inclusive=(True, False)):
            yield frame, self._frame_index[frame]

    def type_counts(self) -> Dict[AgentType, int]:
        counts = Counter(t.agent_type for t in self.tracks)
        return {t: counts.get(t, 0) for t in AgentType}

    def with_tracks(self, tracks: List[AgentTrack], **updates) -> SceneDataset:
        fields = self.model_dump(exclude={"tracks"})
        fields.update(updates)
        return SceneDataset(tracks=tracks, **fields)


@dataclass(eq=False, frozen=True)
class TrainingSample:
    """One sliding window cut from a track.

    Offsets are per-step displacements; ``fut_offsets[0]`` is measured from the
    last observed position.
    """

    dataset: str
    agent_id: int
    agent_type: AgentType
    type_onehot: np.ndarray
    obs_frames: np.ndarray
    fut_frames: np.ndarray
    obs_positions: np.ndarray
    fut_positions: np.ndarray
    obs_offsets: np.ndarray
    fut_offsets: np.ndarray
    neighbor_ids_per_step: Tuple[frozenset, ...]

    @property
    def obs_len(self) -> int:
        return len(self.obs_positions)

    @property
    def pred_len(self) -> int:
        return len(self.fut_positions)

    @property
    def anchor(self) -> np.ndarray:
        return self.obs_positions[-1]

    @property
    def last_obs_frame(self) -> int:
        return int(self.obs_frames[-1])

    @property
    def key(self) -> str:
        return f"{self.dataset}_{self.last_obs_frame}_{self.agent_id}"


@dataclass
class SplitResult:
    train: SceneDataset
    test: SceneDataset
    boundary_frame: int
