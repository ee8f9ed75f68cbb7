"""Group detection: per-step DBSCAN plus a temporal co-existence rate."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, Mapping, Sequence

import numpy as np
from pydantic import BaseModel, Field
from sklearn.cluster import DBSCAN

logger = logging.getLogger(__name__)


class GroupingConfig(BaseModel):
    eps: float = Field(default=1.5, gt=0)
    min_pts: int = Field(default=2, ge=1)
    coexist_rate: float = Field(default=0.9, ge=0.0, le=1.0)


@dataclass(frozen=True)
class GroupAssignment:
    """Group members per agent. Irreflexive and symmetric by construction."""

    members: Dict[int, FrozenSet[int]] = field(default_factory=dict)

    def __post_init__(self):
        for i, group in self.members.items():
            if i in group:
                raise ValueError(f"Agent {i} cannot be its own group member")
            for j in group:
                if i not in self.members.get(j, frozenset()):
                    raise ValueError(f"Group membership of {i} and {j} is not symmetric")

    def of(self, agent_id: int) -> FrozenSet[int]:
        return self.members.get(agent_id, frozenset())

    def __contains__(self, pair: tuple[int, int]) -> bool:
        i, j = pair
        return j in self.of(i)


def dbscan(points: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    """Density-based cluster labels for ``(M, 2)`` points; noise is ``-1``.

    A core point has at least ``min_pts`` points (itself included) within ``eps``.
    """
    if eps <= 0 or min_pts < 1:
        raise ValueError(f"Invalid DBSCAN parameters eps={eps}, min_pts={min_pts}")
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(points) == 0:
        return np.empty(0, dtype=np.int64)
    return DBSCAN(eps=eps, min_samples=min_pts).fit_predict(points).astype(np.int64)


def detect_groups(
    window: Sequence[Mapping[int, np.ndarray]],
    eps: float = 1.5,
    min_pts: int = 2,
    coexist_rate: float = 0.9,
) -> GroupAssignment:
    """Detect group members over an observation window.

    Args:
        window: one ``{agent_id: position}`` mapping per observed step.
        eps, min_pts: DBSCAN parameters applied at every step.
        coexist_rate: minimal fraction of observed steps two agents must share a cluster.

    ``j`` is a group member of ``i`` when they are both present and share a cluster
    label on at least ``coexist_rate * len(window)`` steps.
    """
    if len(window) == 0:
        raise ValueError("Group detection needs at least one observed step")

    together: Counter = Counter()
    for agents in window:
        if len(agents) < 2:
            continue
        ids = list(agents.keys())
        labels = dbscan(np.stack([agents[a] for a in ids]), eps, min_pts)
        clusters: Dict[int, list] = {}
        for agent_id, label in zip(ids, labels):
            if label >= 0:
                clusters.setdefault(int(label), []).append(agent_id)
        for cluster in clusters.values():
            for i, j in combinations(sorted(cluster), 2):
                together[(i, j)] += 1

    steps = len(window)
    members: Dict[int, set] = {}
    for (i, j), count in together.items():
        if count / steps >= coexist_rate:
            members.setdefault(i, set()).add(j)
            members.setdefault(j, set()).add(i)

    logger.debug("Detected %d grouped agents over %d steps", len(members), steps)
    return GroupAssignment({i: frozenset(g) for i, g in members.items()})
