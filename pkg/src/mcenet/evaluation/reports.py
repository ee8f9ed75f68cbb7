from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import List, Sequence

import pandas as pd

from mcenet.model.inference import PredictionSet

from .metrics import MetricReport

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["dataset", "variant", "k", "ade_ml", "fde_ml", "ade_bk", "fde_bk", "n_samples"]
SAMPLE_COLUMNS = ["dataset", "agent_id", "frame", "ade_ml", "fde_ml", "ade_bk", "fde_bk"]
PREDICTION_COLUMNS = ["dataset", "agent_id", "frame", "sample", "step", "x", "y", "score", "most_likely"]


def write_reports(reports: Sequence[MetricReport], path: str | Path) -> Path:
    """Metrics CSV plus a JSON mirror with the same stem."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [r.row() for r in reports]
    columns = REPORT_COLUMNS + (["visibility_rate"] if any("visibility_rate" in r for r in rows) else [])
    pd.DataFrame(rows, columns=columns).to_csv(path, index=False)
    path.with_suffix(".json").write_text(json.dumps([r.model_dump(mode="json") for r in reports], indent=2))
    logger.info("Wrote %d metric rows to %s", len(rows), path)
    return path


def read_reports(path: str | Path) -> List[MetricReport]:
    return [MetricReport.model_validate(r) for r in json.loads(Path(path).with_suffix(".json").read_text())]


def write_sample_rows(rows: Sequence[dict], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(list(rows), columns=SAMPLE_COLUMNS).to_csv(path, index=False)
    return path


def prediction_rows(prediction: PredictionSet, dataset: str, agent_id: int, frame: int) -> List[dict]:
    rows = []
    for n, trajectory in enumerate(prediction.trajectories):
        score = float(prediction.scores[n]) if prediction.scores is not None else float("nan")
        for step, (x, y) in enumerate(trajectory, start=1):
            rows.append(
                {
                    "dataset": dataset,
                    "agent_id": agent_id,
                    "frame": frame,
                    "sample": n,
                    "step": step,
                    "x": float(x),
                    "y": float(y),
                    "score": score,
                    "most_likely": n == prediction.most_likely_index,
                }
            )
    return rows


def write_predictions(rows: Sequence[dict], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(list(rows), columns=PREDICTION_COLUMNS).to_csv(path, index=False)
    return path


def read_predictions(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path)
