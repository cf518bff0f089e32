"""Per-episode navigation metrics. Every distance is a shortest-path length on the environment graph."""

from typing import Sequence

import numpy as np

from navgen.world import EnvGraph, path_length


SUCCESS_DISTANCE = 3.0
METRIC_COLUMNS = ("PL", "NE", "SR", "SPL", "CLS", "nDTW", "SDTW")


def nav_error(graph: EnvGraph, path: Sequence[int], goal: int) -> float:
    return graph.distance(path[-1], goal)


def success(ne: float, d_th: float = SUCCESS_DISTANCE) -> float:
    return 1.0 if ne <= d_th else 0.0


def spl(succeeded: float, shortest: float, taken: float) -> float:
    if shortest <= 0:
        return float(succeeded)
    return float(succeeded) * shortest / max(taken, shortest)


def path_coverage(
    graph: EnvGraph, path: Sequence[int], reference: Sequence[int], d_th: float = SUCCESS_DISTANCE
) -> float:
    nearest = graph.distance_matrix(reference, path).min(axis=1)
    return float(np.mean(np.exp(-nearest / d_th)))


def cls(graph: EnvGraph, path: Sequence[int], reference: Sequence[int], d_th: float = SUCCESS_DISTANCE) -> float:
    """Coverage weighted by length score: PC * EPL / (EPL + |EPL - PL(P)|) with EPL = PC * PL(R)."""
    pc = path_coverage(graph, path, reference, d_th)
    expected = pc * path_length(graph, reference)
    taken = path_length(graph, path)
    denom = expected + abs(expected - taken)
    ls = 1.0 if denom == 0 else expected / denom
    return pc * ls


def dtw(graph: EnvGraph, path: Sequence[int], reference: Sequence[int]) -> float:
    cost = graph.distance_matrix(path, reference)
    n, m = cost.shape
    table = np.full((n + 1, m + 1), np.inf)
    table[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            table[i, j] = cost[i - 1, j - 1] + min(table[i - 1, j], table[i, j - 1], table[i - 1, j - 1])
    return float(table[n, m])


def ndtw(graph: EnvGraph, path: Sequence[int], reference: Sequence[int], d_th: float = SUCCESS_DISTANCE) -> float:
    return float(np.exp(-dtw(graph, path, reference) / (len(reference) * d_th)))


def sdtw(succeeded: float, ndtw_value: float) -> float:
    return ndtw_value if succeeded else 0.0


def episode_scores(
    graph: EnvGraph, path: Sequence[int], reference: Sequence[int], goal: int, d_th: float = SUCCESS_DISTANCE
) -> dict:
    ne = nav_error(graph, path, goal)
    sr = success(ne, d_th)
    nd = ndtw(graph, path, reference, d_th)
    taken = path_length(graph, path)
    return {
        "PL": taken,
        "NE": ne,
        "SR": sr,
        "SPL": spl(sr, graph.distance(reference[0], goal), taken),
        "CLS": cls(graph, path, reference, d_th),
        "nDTW": nd,
        "SDTW": sdtw(sr, nd),
    }
