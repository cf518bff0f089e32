from typing import Tuple, Union

from navgen.errors import ConfigError, DataError, ShapeError
from navgen.models.candidates import candidate_matrix
from navgen.models.config import ModelConfig
from navgen.models.follower import Follower, follower_logits
from navgen.models.history import HistoryEncoder, HistoryState, encode_history, path_history
from navgen.models.speaker import Speaker, lm_scores, lm_token_logprobs
from navgen.ndgrad import read_checkpoint, state_from_checkpoint
from navgen.utils import PathLike


PolicyModel = Union[Follower, Speaker]


def build_model(config: ModelConfig) -> PolicyModel:
    if config.vocab_size <= 4:
        raise ConfigError(f"vocab_size must cover the reserved tokens, got {config.vocab_size}")
    if config.hidden < 2:
        raise ConfigError(f"hidden size must be at least 2, got {config.hidden}")
    return Follower(config) if config.kind == "disc" else Speaker(config)


def load_model(path: PathLike, vocab_hash: str = None) -> Tuple[PolicyModel, dict]:
    """Rebuild a model from a checkpoint; the returned document carries vocab and config hashes."""
    doc = read_checkpoint(path)
    if vocab_hash is not None and doc.get("vocab_hash") != vocab_hash:
        raise DataError(f"{path} was trained with vocab {doc.get('vocab_hash')}, dataset uses {vocab_hash}")
    try:
        config = ModelConfig(**doc["model"])
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"{path}: malformed model config ({e})") from e
    model = build_model(config)
    try:
        model.load_state_dict(state_from_checkpoint(doc))
    except ShapeError as e:
        raise DataError(f"{path}: {e}") from e
    return model, doc


__all__ = [
    "HistoryEncoder",
    "HistoryState",
    "Follower",
    "Speaker",
    "ModelConfig",
    "PolicyModel",
    "build_model",
    "load_model",
    "candidate_matrix",
    "encode_history",
    "follower_logits",
    "lm_scores",
    "lm_token_logprobs",
    "path_history",
]
