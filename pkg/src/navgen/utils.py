import hashlib
import json
import os
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, List, TypeVar, Union

from navgen.errors import DataError, SchemaError


T = TypeVar("T")
PathLike = Union[str, os.PathLike]


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def content_hash(data: Any, length: int = 16) -> str:
    if not isinstance(data, (str, bytes)):
        data = canonical_json(data)
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()[:length]


def write_json(path: PathLike, data: Any):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(data, sort_keys=True, indent=2))
        f.write("\n")


def read_json(path: PathLike, schema: str = None) -> dict:
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path} does not exist.")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise DataError(f"{path}: malformed JSON at line {e.lineno}: {e.msg}") from e
    if schema is not None:
        check_schema(data, schema, source=str(path))
    return data


def check_schema(data: Any, schema: str, source: str = "document"):
    found = data.get("schema") if isinstance(data, dict) else None
    if found != schema:
        raise SchemaError(f"{source}: expected schema {schema!r}, found {found!r}")


def write_jsonl(path: PathLike, records: Iterable[dict]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(canonical_json(record))
            f.write("\n")


def iter_jsonl(path: PathLike) -> Iterator[tuple]:
    """Yield (line_number, record) pairs, skipping blank lines."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path} does not exist.")
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{path}: line {lineno}: malformed record ({e.msg})") from e


def read_jsonl(path: PathLike, parse: Callable[[dict], T], schema: str = None) -> List[T]:
    items = []
    for lineno, record in iter_jsonl(path):
        try:
            if schema is not None:
                check_schema(record, schema, source=f"{path}: line {lineno}")
            items.append(parse(record))
        except SchemaError:
            raise
        except Exception as e:  # pylint: disable=broad-except
            raise DataError(f"{path}: line {lineno}: invalid record ({e})") from e
    return items
