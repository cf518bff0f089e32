from dataclasses import dataclass, field
from typing import Callable, Dict, List, Literal, Optional, Set

from navgen import logger
from navgen.dataset import Episode
from navgen.errors import ConfigError, DataError
from navgen.policies.selectors import Decision, Selector, SelectorSession
from navgen.world import STOP, Action, AgentState, EnvGraph, available_actions, shortest_path, step


TRAJ_SCHEMA = "navgen-traj/1"

StepHook = Callable[[AgentState, List[Action], Decision, SelectorSession], None]


@dataclass
class Trajectory:
    episode_id: str
    nodes: List[int]
    actions: List[Action]
    stopped: bool
    forced: bool = False
    backtracks: List[int] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.nodes) - 1

    def validate(self, graph: EnvGraph):
        for u, v in zip(self.nodes[:-1], self.nodes[1:]):
            if v not in graph.adjacency.get(u, {}):
                raise DataError(f"trajectory {self.episode_id}: {u} -> {v} is not an edge of {graph.env_id}")

    def to_record(self, config_hash: str = "") -> dict:
        return {
            "schema": TRAJ_SCHEMA,
            "episode_id": self.episode_id,
            "nodes": list(self.nodes),
            "actions": [a.to_json() for a in self.actions],
            "stopped": self.stopped,
            "forced": self.forced,
            "steps": self.steps,
            "backtracks": list(self.backtracks),
            "config_hash": config_hash,
        }

    @classmethod
    def from_record(cls, record: dict) -> "Trajectory":
        try:
            traj = cls(
                episode_id=record["episode_id"],
                nodes=[int(n) for n in record["nodes"]],
                actions=[Action.from_json(a) for a in record["actions"]],
                stopped=bool(record["stopped"]),
                forced=bool(record.get("forced", False)),
                backtracks=list(record.get("backtracks", [])),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"malformed trajectory record: {e}") from e
        if not traj.nodes or record.get("steps", traj.steps) != traj.steps:
            raise DataError(f"trajectory {traj.episode_id}: step count does not match its nodes")
        return traj


def _check_budget(max_steps: int):
    if max_steps < 1:
        raise ConfigError(f"max_steps must be at least 1, got {max_steps}")


def _finish(episode: Episode, state: AgentState, stopped: bool, forced: bool, backtracks=()) -> Trajectory:
    return Trajectory(
        episode_id=episode.episode_id,
        nodes=state.path,
        actions=list(state.actions) + [STOP],
        stopped=stopped,
        forced=forced,
        backtracks=list(backtracks),
    )


def rollout(
    selector: Selector,
    graph: EnvGraph,
    episode: Episode,
    max_steps: Optional[int] = None,
    on_step: Optional[StepHook] = None,
) -> Trajectory:
    """Greedy single pass: one decision per step until Stop, or a forced stop once ``max_steps`` moves are used."""
    max_steps = episode.max_steps() if max_steps is None else max_steps
    _check_budget(max_steps)
    session = selector.session(graph, episode)
    state = AgentState(env_id=graph.env_id, current=episode.start)
    while state.t < max_steps:
        actions = available_actions(graph, state.current)
        decision = session.decide(state, actions)
        if on_step is not None:
            on_step(state, actions, decision, session)
        if decision.action.is_stop:
            return _finish(episode, state, stopped=True, forced=False)
        state = step(graph, state, decision.action)
    return _finish(episode, state, stopped=False, forced=True)


@dataclass
class Snapshot:
    node: int
    step: int
    score: float
    forbidden: Set[Action] = field(default_factory=set)

    def open_moves(self, graph: EnvGraph) -> List[int]:
        return [v for v in graph.neighbors(self.node) if Action.move(v) not in self.forbidden]

    @property
    def resume_value(self) -> float:
        return float("inf") if self.score == 0 else -1.0 / self.score


def _resume_target(snapshots: Dict[int, Snapshot], graph: EnvGraph) -> Optional[Snapshot]:
    best = None
    for snap in sorted(snapshots.values(), key=lambda s: s.step):
        if not snap.open_moves(graph):
            continue
        if best is None or snap.resume_value > best.resume_value:
            best = snap
    return best


def backtracking_rollout(
    selector: Selector,
    graph: EnvGraph,
    episode: Episode,
    max_steps: Optional[int] = None,
    resume_score: Literal["logprob", "logit"] = "logprob",
    on_step: Optional[StepHook] = None,
) -> Trajectory:
    """Rollout that backtracks when the agent arrives somewhere for the second time.

    Every decision node keeps a snapshot of the running score of the chosen actions that led there
    and the moves already tried from it. On a revisit the agent walks the shortest path back to the
    snapshot with the highest -1/score that still has an untried move and may not repeat a tried one.
    The walk counts against ``max_steps``.
    """
    if resume_score not in ("logprob", "logit"):
        raise ConfigError(f"resume_score must be 'logprob' or 'logit', got {resume_score!r}")
    max_steps = episode.max_steps() if max_steps is None else max_steps
    _check_budget(max_steps)
    session = selector.session(graph, episode)
    state = AgentState(env_id=graph.env_id, current=episode.start)
    visits = {episode.start: 1}
    snapshots: Dict[int, Snapshot] = {}
    triggers: List[int] = []
    running = 0.0

    while state.t < max_steps:
        snap = snapshots.setdefault(state.current, Snapshot(state.current, state.t, running))
        actions = available_actions(graph, state.current)
        decision = session.decide(state, actions, forbidden=snap.forbidden)
        if on_step is not None:
            on_step(state, actions, decision, session)
        if decision.action.is_stop:
            return _finish(episode, state, stopped=True, forced=False, backtracks=triggers)
        snap.forbidden.add(decision.action)
        running += decision.log_prob if resume_score == "logprob" else decision.logit
        state = step(graph, state, decision.action)
        visits[state.current] = visits.get(state.current, 0) + 1
        if visits[state.current] != 2:
            continue

        target = _resume_target(snapshots, graph)
        if target is None:
            logger.warning(f"{episode.episode_id}: revisit at step {state.t} with no resume candidate")
            continue
        triggers.append(state.t)
        walk, _ = shortest_path(graph, state.current, target.node)
        for node in walk[1:]:
            if state.t >= max_steps:
                break
            state = step(graph, state, Action.move(node))
            visits[node] = visits.get(node, 0) + 1
        running = target.score
    return _finish(episode, state, stopped=False, forced=True, backtracks=triggers)
