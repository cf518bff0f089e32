import heapq
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Sequence, Tuple

import numpy as np

from navgen.errors import UnknownNodeError, UnreachableError


# Path lengths closer than this are treated as equal when breaking ties.
TIE_EPS = 1e-9


@dataclass(eq=False)
class Node:
    id: int
    position: Tuple[float, float, float]
    room_label: str
    landmarks: Tuple[str, ...]
    visual_feature: np.ndarray

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "position": [float(x) for x in self.position],
            "room_label": self.room_label,
            "landmarks": list(self.landmarks),
            "visual_feature": [float(x) for x in self.visual_feature],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Node":
        return cls(
            id=int(data["id"]),
            position=tuple(float(x) for x in data["position"]),
            room_label=str(data["room_label"]),
            landmarks=tuple(data["landmarks"]),
            visual_feature=np.asarray(data["visual_feature"], dtype=np.float64),
        )


@dataclass(eq=False)
class EnvGraph:
    """Undirected navigation graph. Immutable after construction."""

    env_id: str
    nodes: List[Node]
    adjacency: Dict[int, Dict[int, float]] = field(default_factory=dict)

    @classmethod
    def from_edges(cls, env_id: str, nodes: Sequence[Node], edges: Sequence[Tuple[int, int]]) -> "EnvGraph":
        """Build a graph whose edge lengths are the Euclidean distances between endpoint positions."""
        adjacency: Dict[int, Dict[int, float]] = {node.id: {} for node in nodes}
        by_id = {node.id: node for node in nodes}
        for u, v in edges:
            if u == v:
                raise ValueError(f"self loop on node {u}")
            length = float(np.linalg.norm(np.subtract(by_id[u].position, by_id[v].position)))
            adjacency[u][v] = length
            adjacency[v][u] = length
        return cls(env_id=env_id, nodes=list(nodes), adjacency=adjacency)

    def __eq__(self, other):
        if not isinstance(other, EnvGraph):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __contains__(self, node_id) -> bool:
        return node_id in self.adjacency

    def __len__(self) -> int:
        return len(self.nodes)

    def check_node(self, node_id: int):
        if node_id not in self.adjacency:
            raise UnknownNodeError(f"node {node_id} is not in environment {self.env_id}")

    def node(self, node_id: int) -> Node:
        self.check_node(node_id)
        return self._by_id[node_id]

    @cached_property
    def _by_id(self) -> Dict[int, Node]:
        return {node.id: node for node in self.nodes}

    @cached_property
    def _index(self) -> Dict[int, int]:
        return {node.id: i for i, node in enumerate(self.nodes)}

    def neighbors(self, node_id: int) -> List[int]:
        self.check_node(node_id)
        return sorted(self.adjacency[node_id])

    def edge_length(self, u: int, v: int) -> float:
        self.check_node(u)
        try:
            return self.adjacency[u][v]
        except KeyError:
            raise UnknownNodeError(f"no edge {u}-{v} in environment {self.env_id}") from None

    def edges(self) -> List[Tuple[int, int, float]]:
        return sorted((u, v, w) for u, nbrs in self.adjacency.items() for v, w in nbrs.items() if u < v)

    @property
    def feature_dim(self) -> int:
        return int(self.nodes[0].visual_feature.shape[0])

    def is_connected(self) -> bool:
        if not self.nodes:
            return False
        seen = {self.nodes[0].id}
        stack = [self.nodes[0].id]
        while stack:
            u = stack.pop()
            for v in self.adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == len(self.nodes)

    @cached_property
    def _distances(self) -> np.ndarray:
        n = len(self.nodes)
        dist = np.full((n, n), np.inf)
        np.fill_diagonal(dist, 0.0)
        for u, v, w in self.edges():
            i, j = self._index[u], self._index[v]
            dist[i, j] = dist[j, i] = w
        for k in range(n):
            dist = np.minimum(dist, dist[:, k : k + 1] + dist[k : k + 1, :])
        return dist

    def distance(self, u: int, v: int) -> float:
        """Shortest-path length between two nodes (cached all-pairs table)."""
        self.check_node(u)
        self.check_node(v)
        d = self._distances[self._index[u], self._index[v]]
        if not np.isfinite(d):
            raise UnreachableError(f"{v} is unreachable from {u} in {self.env_id}")
        return float(d)

    def distance_matrix(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        for node_id in list(rows) + list(cols):
            self.check_node(node_id)
        ri = [self._index[u] for u in rows]
        ci = [self._index[v] for v in cols]
        return self._distances[np.ix_(ri, ci)]

    def to_dict(self) -> dict:
        return {
            "env_id": self.env_id,
            "nodes": [node.to_dict() for node in self.nodes],
            "edges": [[u, v, w] for u, v, w in self.edges()],
        }


def shortest_path(graph: EnvGraph, u: int, v: int) -> Tuple[List[int], float]:
    """Dijkstra with ties broken by the lexicographically smallest node-id sequence."""
    graph.check_node(u)
    graph.check_node(v)
    if u == v:
        return [u], 0.0

    best: Dict[int, Tuple[float, Tuple[int, ...]]] = {u: (0.0, (u,))}
    heap = [(0.0, (u,))]
    done = set()
    while heap:
        dist, path = heapq.heappop(heap)
        node = path[-1]
        if node in done or best[node][1] != path:
            continue
        done.add(node)
        if node == v:
            return list(path), dist
        for nbr in graph.neighbors(node):
            if nbr in done:
                continue
            cand = (dist + graph.adjacency[node][nbr], path + (nbr,))
            cur = best.get(nbr)
            if cur is None or cand[0] < cur[0] - TIE_EPS or (abs(cand[0] - cur[0]) <= TIE_EPS and cand[1] < cur[1]):
                best[nbr] = cand
                heapq.heappush(heap, cand)
    raise UnreachableError(f"{v} is unreachable from {u} in {graph.env_id}")


def path_length(graph: EnvGraph, path: Sequence[int]) -> float:
    total = 0.0
    for a, b in zip(path[:-1], path[1:]):
        total += graph.edge_length(a, b)
    return total
