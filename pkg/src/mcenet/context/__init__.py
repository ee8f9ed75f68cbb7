"""Interaction and scene context: grouping, polar occupancy and scene rasters."""

from .grouping import GroupAssignment, GroupingConfig, dbscan, detect_groups
from .occupancy import GridSpec, OccupancyGrid, build_occupancy, headings
from .raster import (
    RasterKind,
    RasterShapeError,
    SceneConfig,
    SceneRaster,
    build_heat_map,
    build_heat_map_raster,
    load_raster,
    load_raster_cache,
    resolve_scene_raster,
    save_raster_cache,
    scene_tensor,
    stack_rasters,
    world_to_pixel,
)
from .variants import VARIANTS, ContextVariant, UnknownVariantError, parse_variant
from .builder import ContextBuilder, SampleContext

__all__ = [
    "GroupAssignment",
    "GroupingConfig",
    "dbscan",
    "detect_groups",
    "GridSpec",
    "OccupancyGrid",
    "build_occupancy",
    "headings",
    "RasterKind",
    "RasterShapeError",
    "SceneConfig",
    "SceneRaster",
    "build_heat_map",
    "build_heat_map_raster",
    "load_raster",
    "load_raster_cache",
    "resolve_scene_raster",
    "save_raster_cache",
    "scene_tensor",
    "stack_rasters",
    "world_to_pixel",
    "VARIANTS",
    "ContextVariant",
    "UnknownVariantError",
    "parse_variant",
    "ContextBuilder",
    "SampleContext",
]
