from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from navgen.errors import ShapeError
from navgen.ndgrad import GRUCell, Module, Tensor, as_tensor, concat, reshape
from navgen.world import Action, ActionEmbedding, EnvGraph, action_embedding


@dataclass
class HistoryState:
    """h_t plus the per-step memory of folded (observation, previous action) encodings."""

    h: Tensor
    memory: List[Tensor] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.memory)

    def memory_matrix(self) -> Tensor:
        if not self.memory:
            return self.h
        return concat(self.memory, axis=0)


class HistoryEncoder(Module):
    """Recurrent fold of [visual feature; previous action embedding], shared by both policies."""

    def __init__(self, feature_dim: int, hidden: int, rng: np.random.Generator):
        self.feature_dim = feature_dim
        self.hidden_size = hidden
        self.cell = GRUCell(feature_dim + 4 + feature_dim, hidden, rng)

    def initial(self) -> HistoryState:
        return HistoryState(h=Tensor(np.zeros((1, self.hidden_size))))

    def fold(self, state: HistoryState, observation, previous_action=None) -> HistoryState:
        obs = reshape(as_tensor(observation), (1, self.feature_dim))
        if isinstance(previous_action, ActionEmbedding):
            previous_action = previous_action.vector
        if previous_action is None:
            previous_action = np.zeros(4 + self.feature_dim)
        act = reshape(as_tensor(previous_action), (1, 4 + self.feature_dim))
        h = self.cell(concat([obs, act], axis=1), state.h)
        return HistoryState(h=h, memory=state.memory + [h])

    def encode(self, observations: Sequence, actions: Sequence) -> HistoryState:
        if len(observations) != len(actions) + 1:
            raise ShapeError(
                f"history needs one more observation than actions, got {len(observations)} and {len(actions)}"
            )
        state = self.initial()
        for obs, act in zip(observations, [None] + list(actions)):
            state = self.fold(state, obs, act)
        return state


def encode_history(encoder: HistoryEncoder, observations: Sequence, actions: Sequence) -> HistoryState:
    return encoder.encode(observations, actions)


def path_history(encoder: HistoryEncoder, graph: EnvGraph, path: Sequence[int]) -> HistoryState:
    """Fold the observations and moves along a node path."""
    observations = [graph.node(n).visual_feature for n in path]
    actions = []
    for u, v in zip(path[:-1], path[1:]):
        actions.append(action_embedding(graph, u, Action.move(v)).vector)
    return encoder.encode(observations, actions)
