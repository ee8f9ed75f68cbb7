from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import torch
from pydantic import BaseModel, Field

from mcenet.context.grouping import GroupingConfig
from mcenet.context.occupancy import GridSpec
from mcenet.context.raster import SceneConfig

from .config import ModelConfig
from .data import Standardizer
from .network import MCENet

logger = logging.getLogger(__name__)

FORMAT_VERSION = 2


class ContextSettings(BaseModel):
    """Context construction a model was trained with; inputs at inference must match."""

    grid: GridSpec = Field(default_factory=GridSpec)
    grouping: GroupingConfig = Field(default_factory=GroupingConfig)
    scene: SceneConfig = Field(default_factory=SceneConfig)


@dataclass
class LoadedCheckpoint:
    model: MCENet
    config: ModelConfig
    standardizer: Standardizer
    variant: str
    contexts: ContextSettings


def checkpoint_digest(
    model: MCENet,
    standardizer: Standardizer,
    variant: str,
    contexts: ContextSettings | None = None,
) -> str:
    """SHA-256 over the config, standardizer, variant, context settings and parameter bytes.

    Independent of the container format, so two runs with identical weights give
    identical digests.
    """
    h = hashlib.sha256()
    header = {
        "format_version": FORMAT_VERSION,
        "config": model.config.model_dump(mode="json"),
        "standardizer": standardizer.model_dump(mode="json"),
        "variant": variant,
        "contexts": (contexts or ContextSettings()).model_dump(mode="json"),
    }
    h.update(json.dumps(header, sort_keys=True).encode())
    for name, tensor in sorted(model.state_dict().items()):
        h.update(name.encode())
        h.update(tensor.detach().cpu().contiguous().numpy().tobytes())
    return h.hexdigest()


def save_checkpoint(
    path: str | Path,
    model: MCENet,
    standardizer: Standardizer,
    variant: str,
    contexts: ContextSettings | None = None,
) -> str:
    """Write the checkpoint and a ``.sha256`` file next to it; returns the digest."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    contexts = contexts or ContextSettings()
    torch.save(
        {
            "format_version": FORMAT_VERSION,
            "config": model.config.model_dump(mode="json"),
            "standardizer": standardizer.model_dump(mode="json"),
            "variant": variant,
            "contexts": contexts.model_dump(mode="json"),
            "state_dict": model.state_dict(),
        },
        path,
    )
    digest = checkpoint_digest(model, standardizer, variant, contexts)
    path.with_suffix(path.suffix + ".sha256").write_text(f"{digest}  {path.name}\n")
    logger.info("Saved checkpoint %s (%s)", path, digest[:12])
    return digest


def load_checkpoint(path: str | Path) -> LoadedCheckpoint:
    payload = torch.load(Path(path), map_location="cpu", weights_only=True)
    version = payload.get("format_version")
    if version not in (1, FORMAT_VERSION):
        raise ValueError(f"{path}: unsupported checkpoint format version {version!r}")
    if version == 1:
        logger.warning("%s predates stored context settings; assuming defaults", path)

    config = ModelConfig.model_validate(payload["config"])
    model = MCENet(config)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return LoadedCheckpoint(
        model=model,
        config=config,
        standardizer=Standardizer.model_validate(payload["standardizer"]),
        variant=payload["variant"],
        contexts=ContextSettings.model_validate(payload.get("contexts", {})),
    )
