import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Union

import numpy as np

from navgen.errors import IllegalActionError
from navgen.world.graph import EnvGraph


STOP_ORIENTATION = np.array([0.0, 1.0, 0.0, 1.0])


@dataclass(frozen=True, order=True)
class Action:
    """MoveTo(target) when target is set, Stop otherwise."""

    target: Optional[int] = None

    @property
    def is_stop(self) -> bool:
        return self.target is None

    @classmethod
    def move(cls, target: int) -> "Action":
        return cls(target=int(target))

    def to_json(self) -> Union[int, str]:
        return "STOP" if self.is_stop else self.target

    @classmethod
    def from_json(cls, value: Union[int, str]) -> "Action":
        return STOP if value == "STOP" else cls.move(value)

    def __repr__(self):
        return "Stop" if self.is_stop else f"MoveTo({self.target})"


STOP = Action()


@dataclass
class ActionEmbedding:
    orientation: np.ndarray
    target_feature: np.ndarray

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.orientation, self.target_feature])


@dataclass
class AgentState:
    env_id: str
    current: int
    t: int = 0
    history: List[int] = field(default_factory=list)
    actions: List[Action] = field(default_factory=list)
    terminated: bool = False

    @property
    def path(self) -> List[int]:
        return self.history + [self.current]


def available_actions(graph: EnvGraph, node: int) -> List[Action]:
    return [Action.move(v) for v in graph.neighbors(node)] + [STOP]


def step(graph: EnvGraph, state: AgentState, action: Action) -> AgentState:
    graph.check_node(state.current)
    if state.terminated:
        raise IllegalActionError(f"episode in {state.env_id} already stopped at {state.current}")
    if action.is_stop:
        return replace(state, history=list(state.history), actions=list(state.actions), terminated=True)
    if action.target not in graph.adjacency[state.current]:
        raise IllegalActionError(f"{action} is not available at node {state.current} of {graph.env_id}")
    return AgentState(
        env_id=state.env_id,
        current=action.target,
        t=state.t + 1,
        history=state.history + [state.current],
        actions=state.actions + [action],
    )


def heading_elevation(graph: EnvGraph, u: int, v: int):
    """Heading is 0 towards +y and grows counter-clockwise; elevation is the climb angle."""
    pu = np.asarray(graph.node(u).position)
    pv = np.asarray(graph.node(v).position)
    dx, dy, dz = pv - pu
    heading = math.atan2(-dx, dy)
    elevation = math.atan2(dz, math.hypot(dx, dy))
    return heading, elevation


def action_embedding(
    graph: EnvGraph, node: int, action: Action, stop_feature: Optional[np.ndarray] = None
) -> ActionEmbedding:
    if action.is_stop:
        if stop_feature is None:
            stop_feature = np.zeros(graph.feature_dim)
        return ActionEmbedding(STOP_ORIENTATION.copy(), np.asarray(stop_feature, dtype=np.float64))
    if action.target not in graph.adjacency.get(node, {}):
        raise IllegalActionError(f"{action} is not available at node {node} of {graph.env_id}")
    heading, elevation = heading_elevation(graph, node, action.target)
    orientation = np.array([math.sin(heading), math.cos(heading), math.sin(elevation), math.cos(elevation)])
    return ActionEmbedding(orientation, graph.node(action.target).visual_feature.copy())
