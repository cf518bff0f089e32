"""Common support utilities used by navgen trainers and commands."""

import os
import traceback
from pathlib import Path

from pydantic import BaseModel, ConfigDict, ValidationError

from navgen import logger
from navgen.errors import ConfigError
from navgen.utils import PathLike, content_hash, read_json


CONFIG_SCHEMA = "navgen-config/1"


def monitor(func):
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except Exception:
            logger.error(f"{func.__name__} has failed due to an exception: {traceback.format_exc()}")
            raise

    wrapper.__name__ = func.__name__
    wrapper.__doc__ = func.__doc__
    return wrapper


class NavGenParams(BaseModel):
    model_config = ConfigDict(protected_namespaces=(), extra="ignore")

    project_name: str = "navgen-run"
    seed: int = 0

    def __init__(self, **data):
        try:
            super().__init__(**data)
        except ValidationError as e:
            raise ConfigError(f"invalid {type(self).__name__}: {e}") from e

        if len(self.project_name) > 0 and not self.project_name.replace("-", "").isalnum():
            raise ConfigError("project_name must be alphanumeric but can contain hyphens")
        if len(self.project_name) > 50:
            raise ConfigError("project_name cannot be more than 50 characters")

        supplied = set(data.keys())
        not_supplied = set(type(self).model_fields) - supplied
        if not_supplied:
            logger.warning(f"Parameters not supplied by user and set to default: {', '.join(sorted(not_supplied))}")
        unused = supplied - set(type(self).model_fields) - {"schema"}
        if unused:
            logger.warning(f"Parameters supplied but not used: {', '.join(sorted(unused))}")

    def resolved(self) -> dict:
        return {"schema": CONFIG_SCHEMA, "kind": type(self).__name__, **self.model_dump(mode="json")}

    def config_hash(self) -> str:
        return content_hash(self.resolved())

    def save(self, output_dir: PathLike, name: str = "training_params.json") -> Path:
        os.makedirs(output_dir, exist_ok=True)
        path = Path(output_dir) / name
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.model_dump_json(indent=4))
        return path


def load_config_file(path: PathLike) -> dict:
    """Read a ``navgen-config/1`` document; its keys become parameter values."""
    doc = read_json(path)
    if doc.get("schema") != CONFIG_SCHEMA:
        raise ConfigError(f"{path}: expected schema {CONFIG_SCHEMA!r}, found {doc.get('schema')!r}")
    return {k: v for k, v in doc.items() if k not in ("schema", "kind")}


def apply_seed_override(params: NavGenParams) -> NavGenParams:
    """NAVGEN_SEED replaces the configured seed when it is set."""
    from navgen.core.config import get_settings

    seed = get_settings().seed
    if seed is not None and seed != params.seed:
        logger.info(f"NAVGEN_SEED overrides seed {params.seed} -> {seed}")
        return params.model_copy(update={"seed": seed})
    return params
