"""
Result documents, their JSON and CSV writers, and the human-readable summary
tables printed to standard error.
"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

from core.config.settings import settings
from core.exceptions import OutputPathError
from data.scenario import ScenarioSpec
from engine.shapley import RNG_ALGORITHM

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "axis_value",
    "total_worth",
    "provider_payoff_sum",
    "peer_payoff_sum",
    "per_peer_payoff",
    "max_deviation_gain",
    "deviation_verdict",
]


@dataclass
class ResultDocument:
    scenario: ScenarioSpec
    payload: dict
    duration_seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.model_dump(mode="json"),
            "engine": {"name": settings.APP_NAME, "version": settings.VERSION, "rng": RNG_ALGORITHM},
            "result": self.payload,
            "duration_seconds": self.duration_seconds,
        }


def dumps(data) -> str:
    """repr-based floats re-parse to the same bits; NaN and infinities are refused."""
    return json.dumps(data, indent=2, allow_nan=False) + "\n"


def payload_bytes(document: ResultDocument) -> bytes:
    return dumps(document.payload).encode("utf-8")


def check_output_path(path: Optional[str]) -> None:
    if not path:
        return
    target = Path(path)
    if target.is_dir():
        raise OutputPathError(path, "it is a directory")
    if not target.resolve().parent.is_dir():
        raise OutputPathError(path, f"directory {target.parent} does not exist")


def write_document(document: ResultDocument, out_path: Optional[str] = None) -> str:
    text = dumps(document.to_dict())
    if out_path:
        try:
            Path(out_path).write_text(text, encoding="utf-8")
        except OSError as e:
            raise OutputPathError(out_path, e.strerror or str(e)) from e
        logger.info(f"Wrote result document to {out_path}")
    return text


def sweep_frame(rows: List[Dict]) -> pd.DataFrame:
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def write_sweep_csv(frame: pd.DataFrame, path: str) -> None:
    try:
        frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n", encoding="utf-8")
    except OSError as e:
        raise OutputPathError(path, e.strerror or str(e)) from e
    logger.info(f"Wrote {len(frame)} sweep rows to {path}")


def _player_labels(spec: ScenarioSpec) -> List[str]:
    return [f"{i}:{p.kind}" for i, p in enumerate(spec.players)]


def summary_frame(spec: ScenarioSpec, payload: dict) -> pd.DataFrame:
    analysis = spec.analysis
    if analysis == "shapley":
        if payload["method"] == "exact":
            return pd.DataFrame({"player": _player_labels(spec), "shapley": payload["payoffs"]})
        estimate = payload["estimate"]
        return pd.DataFrame({"player": _player_labels(spec), "mean": estimate["mean"],
                             "std_error": estimate["std_error"]})
    if analysis == "core":
        frame = pd.DataFrame({"player": _player_labels(spec), "shapley": payload["shapley"]})
        if payload["witness"] is not None:
            frame["core_witness"] = payload["witness"]
        return frame
    if analysis == "leastcore":
        return pd.DataFrame({"player": _player_labels(spec), "least_core": payload["witness"]})
    if analysis == "deviate":
        return pd.DataFrame(payload["providers"])
    if analysis == "dynamics":
        return pd.DataFrame({
            "step": range(len(payload["states"])),
            "assignment": [str(state) for state in payload["states"]],
            "potential": payload["diagnostics"]["potentials"],
        })
    return sweep_frame(payload["rows"])


def summary_text(spec: ScenarioSpec, payload: dict) -> str:
    lines = [f"📊 {spec.name or spec.analysis} ({spec.analysis}, {len(spec.players)} players)"]
    if spec.analysis == "core":
        lines.append(f"   core nonempty: {payload['nonempty']}, shapley in core: {payload['membership']['is_member']}")
    elif spec.analysis == "leastcore":
        lines.append(f"   epsilon: {payload['epsilon']:.9g}")
    elif spec.analysis == "deviate":
        lines.append(f"   no provider gains by splitting: {payload['verdict']}")
    elif spec.analysis == "dynamics":
        outcome = payload["outcome"]
        lines.append(f"   outcome: {outcome['kind']} at step {outcome['step']}")
    lines.append(summary_frame(spec, payload).to_string(index=False))
    return "\n".join(lines)
