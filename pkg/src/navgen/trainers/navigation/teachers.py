"""Teacher oracles for imitation: shortest path to the goal, and the fidelity teacher that
stays on the reference path and steers a stray agent back to a temporal goal on it."""

from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Sequence

from navgen.errors import DataError
from navgen.world import STOP, Action, EnvGraph, shortest_path


def teacher_action_shortest(graph: EnvGraph, current: int, goal: int, at_goal_radius: float = 0.0) -> Action:
    if graph.distance(current, goal) <= at_goal_radius:
        return STOP
    path, _ = shortest_path(graph, current, goal)
    return Action.move(path[1])


@dataclass
class TeacherContext:
    graph: EnvGraph
    reference: List[int]
    trajectory: List[int]
    index: Optional[int] = None
    matched_at: int = 0

    @property
    def t(self) -> int:
        return len(self.trajectory) - 1

    @property
    def current(self) -> int:
        return self.trajectory[-1]


def match_index(reference: Sequence[int], node: int, visit: int) -> Optional[int]:
    """Position in ``reference`` matched by the ``visit``-th arrival at ``node``.

    With m occurrences in the reference, the n-th visit matches occurrence n while n < m and the
    last occurrence afterwards.
    """
    positions = [k for k, r in enumerate(reference) if r == node]
    if not positions:
        return None
    m = len(positions)
    chosen = visit if visit < m else m
    return positions[chosen - 1]


def teacher_context(graph: EnvGraph, reference: Sequence[int], trajectory: Sequence[int]) -> TeacherContext:
    """Replay ``trajectory`` to find the last on-path index i and the time t' it was matched."""
    if not reference:
        raise DataError("fidelity teacher needs a non-empty reference path")
    if not trajectory:
        raise DataError("fidelity teacher needs the agent trajectory")
    ctx = TeacherContext(graph=graph, reference=list(reference), trajectory=list(trajectory))
    visits = Counter()
    for s, node in enumerate(trajectory):
        visits[node] += 1
        k = match_index(ctx.reference, node, visits[node])
        if k is not None:
            ctx.index, ctx.matched_at = k, s
    return ctx


def temporal_goal(ctx: TeacherContext) -> int:
    i = 0 if ctx.index is None else ctx.index
    window = ctx.reference[i : i + ctx.t - ctx.matched_at + 1]
    distances = [ctx.graph.distance(ctx.current, r) for r in window]
    return window[distances.index(min(distances))]


def fidelity_reference_action(ctx: TeacherContext) -> Action:
    if not ctx.reference:
        raise DataError("fidelity teacher needs a non-empty reference path")
    if ctx.t < ctx.matched_at:
        raise DataError(f"inconsistent teacher context: t={ctx.t} before t'={ctx.matched_at}")
    last = len(ctx.reference) - 1
    if ctx.index is not None and ctx.matched_at == ctx.t:
        if ctx.index == last:
            return STOP
        return Action.move(ctx.reference[ctx.index + 1])
    goal = temporal_goal(ctx)
    path, _ = shortest_path(ctx.graph, ctx.current, goal)
    return Action.move(path[1])


def reference_teacher(graph: EnvGraph, reference: Sequence[int], goal: int, trajectory: Sequence[int], fidelity: bool):
    """Shortest-path teacher, or the fidelity teacher when ``fidelity`` is set."""
    if fidelity:
        return fidelity_reference_action(teacher_context(graph, reference, trajectory))
    return teacher_action_shortest(graph, trajectory[-1], goal)
