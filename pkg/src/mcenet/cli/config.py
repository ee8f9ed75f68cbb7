"""Experiment configuration: YAML sections, command-line overrides and snapshots."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Dict, List, Sequence

import yaml
from glom import assign
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from mcenet.context.grouping import GroupingConfig
from mcenet.context.occupancy import GridSpec
from mcenet.context.raster import SceneConfig
from mcenet.context.variants import VARIANTS, UnknownVariantError, parse_variant
from mcenet.evaluation.experiments import PipelineConfig
from mcenet.model.config import ModelConfig

OUTPUT_ROOT_ENV = "MCENET_OUTPUT_ROOT"
SECTIONS = ("data", "experiment", "model", "grid", "grouping", "scene")


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending fields."""


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))


def _canonical_tag(tag: str) -> str:
    try:
        return parse_variant(tag).tag
    except UnknownVariantError as e:
        raise ValueError(str(e)) from e


class DataSection(BaseModel):
    manifests: List[Path] = Field(min_length=1)
    target: str | None = None

    @field_validator("manifests")
    @classmethod
    def _exists(cls, v: List[Path]):
        missing = [str(p) for p in v if not p.is_file()]
        if missing:
            raise ValueError(f"manifest file(s) not found: {', '.join(missing)}")
        return v


class ExperimentSection(BaseModel):
    variant: str = "hm+gp"
    variants: List[str] = Field(default_factory=lambda: list(VARIANTS))
    seed: int = 0
    output_dir: Path = Field(default_factory=default_output_dir)
    test_fraction: float = Field(default=0.3, gt=0, lt=1)
    window_stride: int = Field(default=1, ge=1)
    k: int = Field(default=10, ge=1)
    fine_tune_epochs: int = Field(default=10, ge=0)
    visibility_rates: List[float] = Field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    workers: int = Field(default=1, ge=1)

    @field_validator("variant")
    @classmethod
    def _known_variant(cls, v: str):
        return _canonical_tag(v)

    @field_validator("variants")
    @classmethod
    def _known_variants(cls, v: List[str]):
        return [_canonical_tag(tag) for tag in v]

    @field_validator("visibility_rates")
    @classmethod
    def _rates(cls, v: List[float]):
        bad = [r for r in v if not 0.0 <= r <= 1.0]
        if bad:
            raise ValueError(f"visibility rates must lie in [0, 1], got {bad}")
        return v


class ExperimentConfig(BaseModel):
    """One experiment file. ``experiment.seed`` is the single root seed."""

    data: DataSection
    experiment: ExperimentSection = Field(default_factory=ExperimentSection)
    model: ModelConfig = Field(default_factory=ModelConfig)
    grid: GridSpec = Field(default_factory=GridSpec)
    grouping: GroupingConfig = Field(default_factory=GroupingConfig)
    scene: SceneConfig = Field(default_factory=SceneConfig)

    @model_validator(mode="after")
    def _propagate_seed(self):
        if self.model.seed != self.experiment.seed:
            self.model = self.model.model_copy(update={"seed": self.experiment.seed})
        return self

    def pipeline(self) -> PipelineConfig:
        e = self.experiment
        return PipelineConfig(
            test_fraction=e.test_fraction,
            window_stride=e.window_stride,
            k=e.k,
            fine_tune_epochs=e.fine_tune_epochs,
            model=self.model,
            grid=self.grid,
            grouping=self.grouping,
            scene=self.scene,
        )


def apply_overrides(raw: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """Apply ``section.key=value`` assignments in order; values are parsed as YAML scalars."""
    for item in overrides:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"Override '{item}' is not of the form section.key=value")
        if key.split(".")[0] not in SECTIONS:
            raise ConfigError(f"Override '{item}': unknown section '{key.split('.')[0]}', expected one of {SECTIONS}")
        assign(raw, key, yaml.safe_load(value), missing=dict)
    return raw


def _format_errors(error: ValidationError) -> str:
    return "; ".join(f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}" for e in error.errors())


def load_config(path: str | Path | None = None, overrides: Sequence[str] = ()) -> ExperimentConfig:
    """Read a YAML experiment file (optional), apply overrides, validate.

    Relative manifest paths in the file resolve against the file's directory.
    """
    raw: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"Config file not found: {path}")
        try:
            raw = yaml.safe_load(path.read_text()) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: invalid YAML: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a mapping of sections")
        unknown = set(raw) - set(SECTIONS)
        if unknown:
            raise ConfigError(f"{path}: unknown section(s) {sorted(unknown)}, expected {SECTIONS}")
        manifests = (raw.get("data") or {}).get("manifests")
        if isinstance(manifests, str):
            manifests = [manifests]
        if manifests:
            raw["data"]["manifests"] = [str(p if Path(p).is_absolute() else path.parent / p) for p in manifests]

    raw = apply_overrides(raw, overrides)
    manifests = (raw.get("data") or {}).get("manifests")
    if isinstance(manifests, str):
        raw["data"]["manifests"] = [manifests]

    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(_format_errors(e)) from e


def write_resolved_config(config: ExperimentConfig, output_dir: str | Path) -> Path:
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    target = output_dir / "resolved_config.yaml"
    target.write_text(yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False))
    return target
