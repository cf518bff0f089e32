import hashlib
import math
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator

from navgen import logger
from navgen.errors import ConfigError
from navgen.world.graph import EnvGraph, Node


ROOM_LABELS = (
    "kitchen",
    "hallway",
    "bedroom",
    "bathroom",
    "office",
    "lounge",
    "dining",
    "garage",
    "closet",
    "stairs",
    "lobby",
    "patio",
)

LANDMARKS = (
    "table",
    "sofa",
    "lamp",
    "plant",
    "painting",
    "door",
    "window",
    "rug",
    "chair",
    "bed",
    "sink",
    "shelf",
    "piano",
    "mirror",
    "fireplace",
    "counter",
)


class WorldParams(BaseModel):
    n_nodes: int = Field(30, title="Number of navigable nodes (8-200)")
    feature_dim: int = Field(32, title="Dimension D_v of node visual features")
    nodes_per_room: int = Field(5, title="Average number of nodes per room")
    room_spacing: float = Field(8.0, title="Distance between neighbouring room centres")
    room_radius: float = Field(3.0, title="Half-width of the square a room's nodes are scattered in")
    elevation_std: float = Field(0.15, title="Standard deviation of node elevation")
    k_nearest: int = Field(3, title="Each node is linked to its k nearest neighbours")
    room_labels: Tuple[str, ...] = Field(ROOM_LABELS, title="Room label palette")
    landmarks: Tuple[str, ...] = Field(LANDMARKS, title="Landmark palette")
    landmark_density: float = Field(0.5, title="Probability that a node shows a landmark")
    noise: float = Field(0.1, title="Amplitude of the seeded feature noise")

    @field_validator("room_labels", "landmarks")
    @classmethod
    def _known_tokens(cls, value, info):
        palette = ROOM_LABELS if info.field_name == "room_labels" else LANDMARKS
        unknown = [tok for tok in value if tok not in palette]
        if unknown or not value:
            raise ValueError(f"{info.field_name} must be a non-empty subset of {palette}, got unknown {unknown}")
        return tuple(value)


def validate_world_params(params: WorldParams):
    if not 8 <= params.n_nodes <= 200:
        raise ConfigError(f"n_nodes must lie in [8, 200], got {params.n_nodes}")
    if params.feature_dim < 8:
        raise ConfigError(f"feature_dim must be at least 8, got {params.feature_dim}")
    if params.k_nearest < 1 or params.nodes_per_room < 1:
        raise ConfigError("k_nearest and nodes_per_room must be positive")
    if not 0.0 <= params.landmark_density <= 1.0:
        raise ConfigError(f"landmark_density must lie in [0, 1], got {params.landmark_density}")


def make_world_params(**kwargs) -> WorldParams:
    try:
        params = WorldParams(**kwargs)
    except ValidationError as e:
        raise ConfigError(str(e)) from e
    validate_world_params(params)
    return params


def token_code(token: str, dim: int) -> np.ndarray:
    """Fixed unit-scale code for a token, identical across worlds and runs."""
    seed = int.from_bytes(hashlib.sha256(f"navgen:{token}".encode("utf-8")).digest()[:8], "little")
    return np.random.default_rng(seed).standard_normal(dim) / math.sqrt(dim)


def _position_code(position: np.ndarray, dim: int) -> np.ndarray:
    cell = tuple(int(round(x)) for x in position[:2])
    return token_code(f"cell:{cell[0]}:{cell[1]}", dim)


def encode_node(room_label: str, landmarks: Tuple[str, ...], position: np.ndarray, dim: int) -> np.ndarray:
    feature = token_code(room_label, dim) + 0.3 * _position_code(position, dim)
    for landmark in landmarks:
        feature = feature + 0.7 * token_code(landmark, dim)
    return feature


def _spanning_edges(points: np.ndarray) -> List[Tuple[int, int]]:
    """Kruskal over the complete graph on horizontal distances."""
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    pairs = sorted(
        (float(np.linalg.norm(points[i, :2] - points[j, :2])), i, j) for i in range(n) for j in range(i + 1, n)
    )
    edges = []
    for _, i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j))
            if len(edges) == n - 1:
                break
    return edges


def generate_world(seed: int, params: WorldParams = None, env_id: str = None) -> EnvGraph:
    params = params or WorldParams()
    validate_world_params(params)
    rng = np.random.default_rng(seed)
    n = params.n_nodes

    n_rooms = max(2, int(round(n / params.nodes_per_room)))
    side = int(math.ceil(math.sqrt(n_rooms)))
    cells = [(r // side, r % side) for r in range(n_rooms)]
    labels = [params.room_labels[i % len(params.room_labels)] for i in rng.permutation(n_rooms)]

    # every room gets at least one node, the rest are spread at random
    room_of = np.concatenate([np.arange(n_rooms), rng.integers(0, n_rooms, size=n - n_rooms)])
    room_of = np.sort(room_of)

    positions = np.zeros((n, 3))
    for i, room in enumerate(room_of):
        cx, cy = cells[room]
        positions[i, 0] = cx * params.room_spacing + rng.uniform(-params.room_radius, params.room_radius)
        positions[i, 1] = cy * params.room_spacing + rng.uniform(-params.room_radius, params.room_radius)
        positions[i, 2] = rng.normal(0.0, params.elevation_std)

    edges = set(_spanning_edges(positions))
    horizontal = np.linalg.norm(positions[:, None, :2] - positions[None, :, :2], axis=-1)
    for i in range(n):
        order = [j for j in np.argsort(horizontal[i], kind="stable") if j != i]
        for j in order[: params.k_nearest]:
            edges.add((min(i, int(j)), max(i, int(j))))

    nodes = []
    for i in range(n):
        landmarks: Tuple[str, ...] = ()
        if rng.random() < params.landmark_density:
            picks = rng.choice(len(params.landmarks), size=2, replace=False)
            count = 2 if rng.random() < params.landmark_density**2 else 1
            landmarks = tuple(sorted(params.landmarks[k] for k in picks[:count]))
        label = labels[room_of[i]]
        feature = encode_node(label, landmarks, positions[i], params.feature_dim)
        feature = feature + params.noise * rng.standard_normal(params.feature_dim) / math.sqrt(params.feature_dim)
        nodes.append(
            Node(
                id=i,
                position=tuple(float(x) for x in positions[i]),
                room_label=label,
                landmarks=landmarks,
                visual_feature=feature,
            )
        )

    graph = EnvGraph.from_edges(env_id or f"env-{seed:05d}", nodes, sorted(edges))
    logger.debug(f"Generated {graph.env_id}: {n} nodes, {len(graph.edges())} edges")
    return graph
