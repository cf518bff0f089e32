from pathlib import Path

from navgen.errors import DataError
from navgen.utils import PathLike, read_json, write_json
from navgen.world.graph import EnvGraph, Node


WORLD_SCHEMA = "navgen-world/1"
WORLD_SUFFIX = ".world.json"


def world_to_dict(graph: EnvGraph) -> dict:
    return {"schema": WORLD_SCHEMA, **graph.to_dict()}


def world_from_dict(data: dict) -> EnvGraph:
    try:
        nodes = [Node.from_dict(node) for node in data["nodes"]]
        graph = EnvGraph.from_edges(data["env_id"], nodes, [(int(u), int(v)) for u, v, _ in data["edges"]])
        # keep stored lengths so the round trip is exact
        for u, v, w in data["edges"]:
            graph.adjacency[int(u)][int(v)] = float(w)
            graph.adjacency[int(v)][int(u)] = float(w)
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"malformed world document: {e}") from e
    if not graph.is_connected():
        raise DataError(f"world {graph.env_id} is not connected")
    return graph


def save_world(graph: EnvGraph, directory: PathLike) -> Path:
    path = Path(directory) / f"{graph.env_id}{WORLD_SUFFIX}"
    write_json(path, world_to_dict(graph))
    return path


def load_world(path: PathLike) -> EnvGraph:
    return world_from_dict(read_json(path, schema=WORLD_SCHEMA))
