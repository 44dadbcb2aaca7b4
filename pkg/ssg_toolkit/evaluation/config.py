"""Experiment configuration files.

An experiment is a JSON object; every section is optional::

    {
      "name": "synthetic-benchmark",
      "seed": 0,
      "dataset": {"dir": null, "train_scenes": 200, "test_scenes": 50,
                  "num_classes": 12, "predicates": [...], "node_range": [4, 9],
                  "room_extent": [3.5, 3.5]},
      "graphs": "predicted",            # or "gt" for ground-truth graphs only
      "checkpoint": null,               # load instead of training
      "metrics": ["prediction", "retrieval", "changes"],
      "thresholds": {...},              # ExtractionThresholds fields
      "model": {...},                   # ModelConfig fields
      "train": {...},                   # TrainConfig fields
      "retrieval": {"coefficients": ["jaccard", "simpson"], "topk": [1, 3, 5],
                    "ops": [2, 4], "min_pixels": 50}
    }
"""
import json
import logging
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ssg_toolkit.core.graph import ALL_PREDICATES
from ssg_toolkit.geometry.relations import ExtractionThresholds
from ssg_toolkit.retrieval.similarity import COEFFICIENTS
from ssg_toolkit.sgpn.model import ModelConfig
from ssg_toolkit.sgpn.train import TrainConfig
from ssg_toolkit.synth.generator import DEFAULT_ROOM, MAX_CLASSES
from ssg_toolkit.synth.rescan import RESCAN_OPS
from ssg_toolkit.utils.errors import ConfigError

logger = logging.getLogger(__name__)

Metric = Literal["prediction", "retrieval", "changes"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DatasetSection(_Section):
    dir: Optional[Path] = None
    train_scenes: int = Field(200, ge=1)
    test_scenes: int = Field(50, ge=1)
    num_classes: int = Field(12, ge=1, le=MAX_CLASSES)
    predicates: Optional[Tuple[str, ...]] = None
    node_range: Tuple[int, int] = (4, 9)
    room_extent: Tuple[float, float] = DEFAULT_ROOM

    @field_validator("dir")
    @classmethod
    def _dir_exists(cls, value: Optional[Path]) -> Optional[Path]:
        if value is not None and not value.is_dir():
            raise ValueError(f"dataset directory {value} does not exist")
        return value

    @field_validator("predicates")
    @classmethod
    def _known_predicates(cls, value):
        if value is not None:
            unknown = sorted(set(value) - set(ALL_PREDICATES))
            if unknown:
                raise ValueError(f"unknown predicates {unknown}")
            if not value:
                raise ValueError("predicate vocabulary must not be empty")
        return value

    @field_validator("node_range")
    @classmethod
    def _range(cls, value):
        lo, hi = value
        if not 2 <= lo <= hi:
            raise ValueError("node_range must satisfy 2 <= min <= max")
        return value

    @field_validator("room_extent")
    @classmethod
    def _room(cls, value):
        if min(value) < 1.5:
            raise ValueError("room_extent must be at least 1.5 m per side")
        return value


class ThresholdSection(_Section):
    left_right: float = Field(0.1, ge=0)
    front_behind: float = Field(0.1, ge=0)
    close_by: float = Field(0.5, gt=0)
    size_ratio: float = Field(1.5, ge=1)
    min_pixels: int = Field(50, ge=0)
    support_radius: float = Field(0.05, gt=0)
    lowest_fraction: float = Field(0.1, gt=0, lt=1)
    lying_ratio: float = Field(0.5, gt=0)

    def build(self) -> ExtractionThresholds:
        return ExtractionThresholds(**self.model_dump())


class ModelSection(_Section):
    point_widths: Tuple[int, ...] = (64, 128, 256)
    feature_width: int = Field(256, ge=1)
    gcn_layers: int = Field(5, ge=0)
    head_widths: Tuple[int, ...] = (256, 128)
    num_points: int = Field(256, ge=1)
    predicate_mode: Literal["multi", "single"] = "multi"
    classify_from: Literal["gcn", "pointnet"] = "gcn"

    def build(self, seed: int, baseline: bool = False) -> ModelConfig:
        return ModelConfig(**self.model_dump(), baseline=baseline, seed=seed)


class TrainSection(_Section):
    lambda_obj: float = Field(0.1, ge=0)
    gamma: float = Field(2.0, ge=0)
    predicate_alpha: float = Field(0.25, gt=0, lt=1)
    learning_rate: float = Field(1e-4, gt=0)
    epochs: int = Field(30, ge=1)
    recall_k: int = Field(3, ge=1)

    def build(self, seed: int) -> TrainConfig:
        return TrainConfig(**self.model_dump(), seed=seed)


class RetrievalSection(_Section):
    coefficients: Tuple[str, ...] = ("jaccard", "simpson")
    topk: Tuple[int, ...] = (1, 3, 5)
    ops: Tuple[int, int] = (2, 4)
    rescan_ops: Tuple[str, ...] = RESCAN_OPS
    min_pixels: int = Field(50, ge=0)

    @field_validator("coefficients")
    @classmethod
    def _known_coefficients(cls, value):
        unknown = sorted(set(value) - set(COEFFICIENTS))
        if unknown or not value:
            raise ValueError(f"coefficients must be a non-empty subset of {sorted(COEFFICIENTS)}")
        return value

    @field_validator("topk")
    @classmethod
    def _positive(cls, value):
        if not value or min(value) < 1:
            raise ValueError("topk values must be positive")
        return tuple(sorted(set(value)))

    @field_validator("rescan_ops")
    @classmethod
    def _known_ops(cls, value):
        if not value or set(value) - set(RESCAN_OPS):
            raise ValueError(f"rescan_ops must be a non-empty subset of {list(RESCAN_OPS)}")
        return value

    @field_validator("ops")
    @classmethod
    def _op_range(cls, value):
        lo, hi = value
        if not 0 <= lo <= hi:
            raise ValueError("ops must satisfy 0 <= min <= max")
        return value


class ExperimentConfig(_Section):
    name: str = "experiment"
    seed: int = 0
    dataset: DatasetSection = DatasetSection()
    graphs: Literal["gt", "predicted"] = "predicted"
    checkpoint: Optional[Path] = None
    metrics: Tuple[Metric, ...] = ("prediction", "retrieval", "changes")
    thresholds: ThresholdSection = ThresholdSection()
    model: ModelSection = ModelSection()
    train: TrainSection = TrainSection()
    retrieval: RetrievalSection = RetrievalSection()

    @field_validator("checkpoint")
    @classmethod
    def _checkpoint_exists(cls, value: Optional[Path]) -> Optional[Path]:
        if value is not None and not value.is_file():
            raise ValueError(f"checkpoint {value} does not exist")
        return value

    @model_validator(mode="after")
    def _prediction_needs_model(self):
        if self.graphs == "gt" and "prediction" in self.metrics:
            raise ValueError("the 'prediction' metric needs graphs='predicted'")
        return self

    def echo(self) -> dict:
        return json.loads(self.model_dump_json())


def _problems(error: ValidationError) -> List[str]:
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{location}: {item['msg']}")
    return lines


def parse_config(payload: Union[dict, str]) -> ExperimentConfig:
    """Validated config from a dict or JSON text; problems become one ConfigError."""
    try:
        if isinstance(payload, str):
            return ExperimentConfig.model_validate_json(payload)
        return ExperimentConfig.model_validate(payload)
    except ValidationError as e:
        raise ConfigError(_problems(e)) from e


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"{path}: {e}") from e
    config = parse_config(text)
    logger.info(f"Loaded experiment config {config.name!r} from {path}")
    return config
