"""JSON checkpoints of trained networks.

Layout::

    {
      "format": "ssg-checkpoint",
      "version": 1,
      "model_config": {...},          # ModelConfig fields
      "train_config": {...} | null,   # TrainConfig fields
      "vocabulary": {"classes": [...], "predicates": [...]},
      "parameters": {"<name>": {"shape": [...], "data": [...]}}
    }

Floats are written with full round-trip precision, so a loaded network
reproduces the saved one's scores exactly.
"""
import json
import logging
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from ssg_toolkit.sgpn.model import ModelConfig, SceneGraphNet, Vocabulary
from ssg_toolkit.sgpn.train import TrainConfig
from ssg_toolkit.utils.errors import DataError

logger = logging.getLogger(__name__)

FORMAT = "ssg-checkpoint"
VERSION = 1


def _tuples(config: dict) -> dict:
    return {k: tuple(v) if isinstance(v, list) else v for k, v in config.items()}


def save_checkpoint(model: SceneGraphNet, path: Union[str, Path],
                    train_config: Optional[TrainConfig] = None) -> Path:
    path = Path(path)
    payload = {
        "format": FORMAT,
        "version": VERSION,
        "model_config": asdict(model.config),
        "train_config": asdict(train_config) if train_config is not None else None,
        "vocabulary": {"classes": list(model.vocabulary.classes), "predicates": list(model.vocabulary.predicates)},
        "parameters": {
            name: {"shape": list(p.shape), "data": p.data.reshape(-1).tolist()}
            for name, p in model.named_parameters()
        },
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload), encoding="utf-8")
    logger.info(f"Saved checkpoint with {model.num_parameters()} parameters to {path}")
    return path


def load_checkpoint(path: Union[str, Path]) -> Tuple[SceneGraphNet, Optional[TrainConfig]]:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise DataError(f"{path}: cannot read checkpoint ({e})") from e
    if payload.get("format") != FORMAT or payload.get("version") != VERSION:
        raise DataError(f"{path}: not a version {VERSION} {FORMAT} file")
    try:
        model_config = ModelConfig(**_tuples(payload["model_config"]))
        train_config = payload.get("train_config")
        train_config = TrainConfig(**_tuples(train_config)) if train_config is not None else None
        vocabulary = Vocabulary(tuple(payload["vocabulary"]["classes"]), tuple(payload["vocabulary"]["predicates"]))
        model = SceneGraphNet(model_config, vocabulary)
        state = {
            name: np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
            for name, entry in payload["parameters"].items()
        }
        model.load_state_dict(state)
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"{path}: malformed checkpoint ({e})") from e
    logger.info(f"Loaded checkpoint {path}")
    return model, train_config
