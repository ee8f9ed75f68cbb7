from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from mcenet.dataio.schemas import SceneDataset, TrainingSample

from .grouping import GroupAssignment, GroupingConfig, detect_groups
from .occupancy import GridSpec, OccupancyGrid, build_occupancy, headings
from .raster import SceneConfig, SceneRaster, scene_tensor
from .variants import ContextVariant

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class SampleContext:
    """Interaction and scene inputs of one sample; ``None`` when the variant omits them."""

    obs_occupancy: OccupancyGrid | None = None
    fut_occupancy: OccupancyGrid | None = None
    obs_scene: np.ndarray | None = None
    fut_scene: np.ndarray | None = None


class ContextBuilder:
    """Builds ``SampleContext`` objects for windows of one dataset.

    Groups are detected over each window's observed frames with every agent present
    in those frames, and cached per observation window. Static scene tensors are
    computed once and shared by reference across samples.

    Args:
    - **dataset**: the dataset (or split view) the samples were cut from.
    - **variant**: which contexts to build.
    - **grid**, **grouping**, **scene**: context settings.
    - **raster**: scene raster, required when ``variant.scene_kind`` is set.
    """

    def __init__(
        self,
        dataset: SceneDataset,
        variant: ContextVariant,
        grid: GridSpec | None = None,
        grouping: GroupingConfig | None = None,
        scene: SceneConfig | None = None,
        raster: SceneRaster | None = None,
    ):
        self.dataset = dataset
        self.variant = variant
        self.grid = grid or GridSpec()
        self.grouping = grouping or GroupingConfig()
        self.scene = scene or SceneConfig()
        self.raster = raster

        if variant.scene_kind is not None:
            if raster is None:
                raise ValueError(f"Variant '{variant.tag}' needs a {variant.scene_kind.value} raster")
            if raster.kind != variant.scene_kind:
                raise ValueError(f"Variant '{variant.tag}' expects a {variant.scene_kind.value} raster, got {raster.kind.value}")

        self._static_scene: np.ndarray | None = None
        if raster is not None and variant.scene_kind is not None and self.scene.mode == "static":
            size = (self.scene.input_size, self.scene.input_size)
            self._static_scene = scene_tensor(raster, mode="static", output_size=size)

        self._groups: Dict[Tuple[int, ...], GroupAssignment] = {}

    def groups_for(self, sample: TrainingSample) -> GroupAssignment:
        key = tuple(int(f) for f in sample.obs_frames)
        if key not in self._groups:
            window = [self.dataset.agents_at(f) for f in key]
            self._groups[key] = detect_groups(
                window,
                eps=self.grouping.eps,
                min_pts=self.grouping.min_pts,
                coexist_rate=self.grouping.coexist_rate,
            )
        return self._groups[key]

    def build(self, sample: TrainingSample) -> SampleContext:
        context = SampleContext()

        if self.variant.use_grouping:
            groups = self.groups_for(sample)
            # The past grid sees only observed motion; the future grid may use the whole path.
            path = np.concatenate([sample.obs_positions, sample.fut_positions])
            T = sample.obs_len

            context.obs_occupancy = build_occupancy(
                sample.agent_id,
                sample.obs_positions,
                [self.dataset.agents_at(int(f)) for f in sample.obs_frames],
                groups,
                self.grid,
                step_headings=headings(sample.obs_positions),
            )
            context.fut_occupancy = build_occupancy(
                sample.agent_id,
                sample.fut_positions,
                [self.dataset.agents_at(int(f)) for f in sample.fut_frames],
                groups,
                self.grid,
                step_headings=headings(path)[T:],
            )

        if self.variant.scene_kind is not None:
            if self._static_scene is not None:
                context.obs_scene = self._static_scene
                context.fut_scene = self._static_scene
            else:
                size = (self.scene.input_size, self.scene.input_size)
                for horizon in ("observed", "future"):
                    crops = scene_tensor(
                        self.raster,
                        sample,
                        mode="per_step_crop",
                        crop_size_m=self.scene.crop_size_m,
                        output_size=size,
                        horizon=horizon,
                    )
                    if horizon == "observed":
                        context.obs_scene = crops
                    else:
                        context.fut_scene = crops

        return context

    def build_all(self, samples: Sequence[TrainingSample]) -> List[SampleContext]:
        contexts = [self.build(s) for s in samples]
        logger.info(
            "Built %d contexts for %s (variant %s, %d group windows)",
            len(contexts), self.dataset.name, self.variant.tag, len(self._groups),
        )
        return contexts
