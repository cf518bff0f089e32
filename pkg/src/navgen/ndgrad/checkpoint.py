import json
from pathlib import Path
from typing import Dict

import numpy as np

from navgen.errors import DataError
from navgen.ndgrad.nn import Module
from navgen.utils import PathLike, check_schema


CKPT_SCHEMA = "navgen-ckpt/1"


def checkpoint_bytes(module: Module, model: dict, vocab_hash: str, config_hash: str) -> bytes:
    params = {
        name: {"shape": list(value.shape), "values": [float(x) for x in value.reshape(-1)]}
        for name, value in module.state_dict().items()
    }
    doc = {
        "schema": CKPT_SCHEMA,
        "model": model,
        "vocab_hash": vocab_hash,
        "config_hash": config_hash,
        "params": params,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def save_checkpoint(path: PathLike, module: Module, model: dict, vocab_hash: str, config_hash: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(checkpoint_bytes(module, model, vocab_hash, config_hash))
    return path


def read_checkpoint(path: PathLike) -> dict:
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path} does not exist.")
    try:
        doc = json.loads(path.read_bytes())
    except json.JSONDecodeError as e:
        raise DataError(f"{path}: malformed checkpoint ({e.msg})") from e
    check_schema(doc, CKPT_SCHEMA, source=str(path))
    return doc


def state_from_checkpoint(doc: dict) -> Dict[str, np.ndarray]:
    try:
        return {
            name: np.asarray(entry["values"], dtype=np.float64).reshape(entry["shape"])
            for name, entry in doc["params"].items()
        }
    except (KeyError, ValueError) as e:
        raise DataError(f"malformed checkpoint parameters: {e}") from e
