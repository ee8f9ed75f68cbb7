"""Context variants of the ablation matrix."""

from __future__ import annotations

from typing import Dict

from pydantic import BaseModel, ConfigDict

from .raster import RasterKind


class UnknownVariantError(ValueError):
    """Raised for a variant tag outside the fixed ablation set."""


class ContextVariant(BaseModel):
    """Which contexts a model sees besides motion.

    - **use_grouping**: feed the occupancy grid of non-group neighbors.
    - **scene_kind**: raster kind fed to the scene branch, or ``None``.
    """

    model_config = ConfigDict(frozen=True)

    tag: str
    use_grouping: bool
    scene_kind: RasterKind | None = None


VARIANTS: Dict[str, ContextVariant] = {
    v.tag: v
    for v in (
        ContextVariant(tag="baseline", use_grouping=False),
        ContextVariant(tag="gp", use_grouping=True),
        ContextVariant(tag="hm", use_grouping=False, scene_kind=RasterKind.HEAT_MAP),
        ContextVariant(tag="hm+gp", use_grouping=True, scene_kind=RasterKind.HEAT_MAP),
        ContextVariant(tag="ap+gp", use_grouping=True, scene_kind=RasterKind.AERIAL),
        ContextVariant(tag="sm+gp", use_grouping=True, scene_kind=RasterKind.SEGMENTED),
    )
}

_SCENE_TOKENS = ("hm", "ap", "sm")


def parse_variant(tag: str) -> ContextVariant:
    """Resolve a tag such as ``"MCE+hm+gp"``, ``"+gp"`` or ``"baseline"``."""
    key = tag.strip().lower().replace(" ", "")
    if key.startswith("mce"):
        key = key[3:]
    parts = [p for p in key.split("+") if p]

    if parts in ([], ["baseline"]):
        return VARIANTS["baseline"]

    scene = [p for p in parts if p in _SCENE_TOKENS]
    rest = [p for p in parts if p not in _SCENE_TOKENS and p != "gp"]
    canonical = "+".join(scene + (["gp"] if "gp" in parts else []))

    if rest or len(scene) > 1 or canonical not in VARIANTS:
        raise UnknownVariantError(f"Unknown variant '{tag}'. Expected one of {list(VARIANTS)}.")
    return VARIANTS[canonical]
