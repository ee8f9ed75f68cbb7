"""Polar occupancy grids of non-group neighbors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Mapping, Sequence

import numpy as np
from pydantic import BaseModel, Field

from .grouping import GroupAssignment

_MOTION_EPS = 1e-9


class GridSpec(BaseModel):
    """Polar grid layout: ``R`` orientation sectors times ``D`` distance rings.

    Bins are half-open: sectors ``[-pi + r*2pi/R, -pi + (r+1)*2pi/R)``, rings
    ``[d*w, (d+1)*w)`` with ``w = max_radius / D``; a neighbor exactly at
    ``max_radius`` is kept in the outermost ring.
    """

    num_orientation_bins: int = Field(default=8, ge=1)
    num_distance_bins: int = Field(default=8, ge=1)
    max_radius: float = Field(default=8.0, gt=0)
    reference_frame: Literal["heading", "global"] = "heading"

    @property
    def cells(self) -> int:
        return self.num_orientation_bins * self.num_distance_bins

    def polar_bin(self, dx: float, dy: float, heading: float) -> tuple[int, int] | None:
        """Cell ``(r, d)`` of a relative offset, or ``None`` beyond ``max_radius``."""
        distance = float(np.hypot(dx, dy))
        if distance > self.max_radius:
            return None

        angle = float(np.arctan2(dy, dx))
        if self.reference_frame == "heading":
            angle -= heading
        angle = (angle + np.pi) % (2 * np.pi)  # [0, 2pi)

        r = min(int(angle // (2 * np.pi / self.num_orientation_bins)), self.num_orientation_bins - 1)
        d = min(int(distance // (self.max_radius / self.num_distance_bins)), self.num_distance_bins - 1)
        return r, d


@dataclass(eq=False)
class OccupancyGrid:
    """``(S, R, D)`` neighbor counts, one polar grid per step."""

    counts: np.ndarray

    @property
    def steps(self) -> int:
        return self.counts.shape[0]

    def flat(self) -> np.ndarray:
        return self.counts.reshape(self.steps, -1)


def headings(positions: np.ndarray) -> np.ndarray:
    """Per-step heading angle of a ``(S, 2)`` path.

    Step ``t`` uses the most recent non-zero displacement reaching ``t``; steps
    before the first movement use the first movement; a path that never moves
    faces the global +x axis.
    """
    positions = np.asarray(positions, dtype=np.float64)
    steps = len(positions)
    out = np.zeros(steps, dtype=np.float64)
    if steps < 2:
        return out

    offsets = np.diff(positions, axis=0)
    moving = np.hypot(offsets[:, 0], offsets[:, 1]) > _MOTION_EPS
    if not moving.any():
        return out

    angles = np.arctan2(offsets[:, 1], offsets[:, 0])
    current = angles[int(np.argmax(moving))]
    for t in range(1, steps):
        if moving[t - 1]:
            current = angles[t - 1]
        out[t] = current
    out[0] = angles[int(np.argmax(moving))]
    return out


def build_occupancy(
    target_id: int,
    target_positions: np.ndarray,
    neighbors_per_step: Sequence[Mapping[int, np.ndarray]],
    groups: GroupAssignment,
    spec: GridSpec,
    step_headings: np.ndarray | None = None,
) -> OccupancyGrid:
    """Count non-group neighbors per polar cell at every step.

    Args:
        target_id: agent the grid is centred on.
        target_positions: ``(S, 2)`` target positions, one per step.
        neighbors_per_step: ``{agent_id: position}`` of co-present agents per step.
        groups: group members of the target never enter the grid.
        spec: grid layout and reference frame.
        step_headings: optional per-step headings; derived from ``target_positions``
            when omitted.
    """
    target_positions = np.asarray(target_positions, dtype=np.float64).reshape(-1, 2)
    if len(neighbors_per_step) != len(target_positions):
        raise ValueError(
            f"Got {len(neighbors_per_step)} neighbor steps for {len(target_positions)} target positions"
        )
    if step_headings is None:
        step_headings = headings(target_positions)

    counts = np.zeros(
        (len(target_positions), spec.num_orientation_bins, spec.num_distance_bins), dtype=np.int64
    )
    friends = groups.of(target_id)

    for t, (origin, agents) in enumerate(zip(target_positions, neighbors_per_step)):
        for agent_id, position in agents.items():
            if agent_id == target_id or agent_id in friends:
                continue
            cell = spec.polar_bin(position[0] - origin[0], position[1] - origin[1], step_headings[t])
            if cell is not None:
                counts[t, cell[0], cell[1]] += 1

    return OccupancyGrid(counts)
