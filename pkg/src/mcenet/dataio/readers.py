"""Trajectory text files and YAML dataset manifests."""

from __future__ import annotations

import io
import logging
from pathlib import Path
from typing import Dict, List, Literal, Tuple

import numpy as np
import pandas as pd
import yaml
from pydantic import BaseModel, Field, field_validator, model_validator

from .schemas import AgentTrack, AgentType, RasterKey, SceneDataset
from .windows import resample

logger = logging.getLogger(__name__)

_COLUMNS = ["frame_id", "agent_id", "x", "y", "type"]
_SEPARATORS = {
    "auto": r"[,\s]+",
    "whitespace": r"\s+",
    "comma": r"\s*,\s*",
}


class TrajectoryParseError(ValueError):
    """Raised for malformed trajectory rows. Carries the 1-based file line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class TrajectoryFormat(BaseModel):
    """How a trajectory text file is laid out and georeferenced.

    Rows are ``frame_id agent_id x y type``. When ``default_type`` is set, 4-column
    files (pedestrian benchmarks without a type column) are accepted too.
    """

    name: str | None = None
    frame_rate: float = Field(default=2.0, gt=0)
    meters_per_pixel: float = Field(default=1.0, gt=0)
    delimiter: Literal["auto", "whitespace", "comma"] = "auto"
    default_type: AgentType | None = None


def load_dataset(path: str | Path, fmt: TrajectoryFormat | None = None) -> SceneDataset:
    """Parse a trajectory file into a ``SceneDataset`` with one track per agent."""
    path = Path(path)
    fmt = fmt or TrajectoryFormat()

    line_numbers: List[int] = []
    kept: List[str] = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        line_numbers.append(lineno)
        kept.append(stripped)

    if not kept:
        raise TrajectoryParseError(f"{path} contains no trajectory rows")

    try:
        table = pd.read_csv(
            io.StringIO("\n".join(kept)),
            sep=_SEPARATORS[fmt.delimiter],
            engine="python",
            header=None,
            dtype=str,
        )
    except pd.errors.ParserError as e:
        raise TrajectoryParseError(f"{path}: {e}") from e

    table = _normalize_columns(table, fmt, line_numbers)
    table["line"] = line_numbers

    missing = table[_COLUMNS].isna().any(axis=1)
    if missing.any():
        raise TrajectoryParseError("row has missing fields", int(table[missing]["line"].iloc[0]))

    for column in ("frame_id", "agent_id"):
        numeric = pd.to_numeric(table[column], errors="coerce")
        bad = numeric.isna() | (numeric != numeric.round())
        if bad.any():
            row = table[bad].iloc[0]
            raise TrajectoryParseError(f"{column} '{row[column]}' is not an integer", int(row["line"]))
        table[column] = numeric.astype(np.int64)

    for column in ("x", "y"):
        numeric = pd.to_numeric(table[column], errors="coerce")
        if numeric.isna().any():
            row = table[numeric.isna()].iloc[0]
            raise TrajectoryParseError(f"{column} '{row[column]}' is not a number", int(row["line"]))
        table[column] = numeric.astype(np.float64)

    types: List[AgentType] = []
    for token, line in zip(table["type"], table["line"]):
        try:
            types.append(AgentType.parse(str(token)))
        except ValueError:
            raise TrajectoryParseError(f"unknown agent type '{token}'", int(line))
    table["type"] = types

    dupes = table.duplicated(subset=["frame_id", "agent_id"], keep="first")
    if dupes.any():
        row = table[dupes].iloc[0]
        raise TrajectoryParseError(
            f"duplicate record for agent {row['agent_id']} at frame {row['frame_id']}", int(row["line"])
        )

    tracks: List[AgentTrack] = []
    for agent_id, rows in table.sort_values(["agent_id", "frame_id"]).groupby("agent_id", sort=True):
        kinds = set(rows["type"])
        if len(kinds) > 1:
            raise TrajectoryParseError(
                f"agent {agent_id} has conflicting types {sorted(k.value for k in kinds)}",
                int(rows["line"].iloc[0]),
            )
        tracks.append(
            AgentTrack(
                agent_id=int(agent_id),
                agent_type=kinds.pop(),
                frames=rows["frame_id"].to_numpy(),
                positions=rows[["x", "y"]].to_numpy(),
            )
        )

    dataset = SceneDataset(
        name=fmt.name or path.stem,
        frame_rate=fmt.frame_rate,
        meters_per_pixel=fmt.meters_per_pixel,
        tracks=tracks,
    )
    logger.info("Loaded %s: %d tracks, %d records", dataset.name, len(tracks), len(table))
    return dataset


def _normalize_columns(table: pd.DataFrame, fmt: TrajectoryFormat, line_numbers: List[int]) -> pd.DataFrame:
    width = table.shape[1]
    if width == 5:
        table.columns = _COLUMNS
        return table
    if width == 4 and fmt.default_type is not None:
        table.columns = _COLUMNS[:4]
        table["type"] = fmt.default_type.value
        return table

    short = table.isna().any(axis=1)
    line = line_numbers[int(np.argmax(short.to_numpy()))] if short.any() else line_numbers[0]
    raise TrajectoryParseError(f"expected 5 columns ({' '.join(_COLUMNS)}), found {width}", line)


def serialize_dataset(dataset: SceneDataset, path: str | Path) -> None:
    """Write the dataset in the trajectory text format, sorted by frame then agent."""
    records = [
        (int(f), track.agent_id, float(x), float(y), track.agent_type.value)
        for track in dataset.tracks
        for f, (x, y) in zip(track.frames, track.positions)
    ]
    table = pd.DataFrame(records, columns=_COLUMNS).sort_values(["frame_id", "agent_id"])

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        handle.write(f"# {' '.join(_COLUMNS)}\n")
        table.to_csv(handle, sep=" ", header=False, index=False)


# --------------------------------------------------------------------- #
# manifests
# --------------------------------------------------------------------- #

class DatasetManifest(BaseModel):
    """Declarative description of one recorded scene.

    Relative paths are resolved against the manifest's directory by ``load_manifest``.
    """

    name: str
    trajectories: Path
    frame_rate: float = Field(gt=0)
    meters_per_pixel: float = Field(gt=0)
    delimiter: Literal["auto", "whitespace", "comma"] = "auto"
    default_type: AgentType | None = None
    target_fps: float | None = Field(default=None, gt=0)
    raster_shape: Tuple[int, int] | None = None
    rasters: Dict[RasterKey, List[Path]] = Field(default_factory=dict)

    @field_validator("rasters", mode="before")
    @classmethod
    def _listify(cls, v):
        if v is None:
            return {}
        return {k: [p] if isinstance(p, (str, Path)) else list(p) for k, p in dict(v).items()}

    @model_validator(mode="after")
    def _check_shape(self):
        if self.raster_shape is not None and min(self.raster_shape) <= 0:
            raise ValueError(f"raster_shape must be positive, got {self.raster_shape}")
        return self

    def resolved(self, root: Path) -> DatasetManifest:
        def _abs(p: Path) -> Path:
            return p if p.is_absolute() else (root / p)

        return self.model_copy(
            update={
                "trajectories": _abs(self.trajectories),
                "rasters": {k: [_abs(p) for p in paths] for k, paths in self.rasters.items()},
            }
        )


def load_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        data = yaml.safe_load(handle) or {}
    return DatasetManifest.model_validate(data).resolved(path.parent)


def load_from_manifest(path: str | Path) -> SceneDataset:
    """Load, georeference and (optionally) resample the dataset a manifest names."""
    manifest = load_manifest(path)
    dataset = load_dataset(
        manifest.trajectories,
        TrajectoryFormat(
            name=manifest.name,
            frame_rate=manifest.frame_rate,
            meters_per_pixel=manifest.meters_per_pixel,
            delimiter=manifest.delimiter,
            default_type=manifest.default_type,
        ),
    )
    dataset = dataset.with_tracks(
        dataset.tracks, raster_shape=manifest.raster_shape, rasters=manifest.rasters
    )
    if manifest.target_fps is not None:
        dataset = resample(dataset, manifest.target_fps)
    return dataset
