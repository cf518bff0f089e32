"""Action selectors.

A selector is bound to one episode through :meth:`Selector.session`. The session keeps the
models' history encodings in step with the agent, folding every new node of ``state.path``
(return walks included) before it scores the current action set.
"""

import zlib
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence

import numpy as np

from navgen.dataset import Episode
from navgen.models import Follower, HistoryState, Speaker, candidate_matrix, lm_scores
from navgen.policies.posterior import ActionPosterior, as_array, check_beta, combine_scores
from navgen.trainers.navigation.teachers import reference_teacher
from navgen.world import Action, AgentState, EnvGraph, action_embedding


@dataclass
class Decision:
    index: int
    action: Action
    posterior: ActionPosterior

    @property
    def log_prob(self) -> float:
        return float(self.posterior.log_probs[self.index])

    @property
    def logit(self) -> float:
        return float(self.posterior.scores[self.index])


class HistoryTracker:
    """Incremental h_t for one model along a growing node path."""

    def __init__(self, model, graph: EnvGraph):
        self.model = model
        self.graph = graph
        self.state: HistoryState = model.history.initial()
        self.folded: List[int] = []

    def sync(self, path: Sequence[int]) -> HistoryState:
        if list(path[: len(self.folded)]) != self.folded:
            self.state = self.model.history.initial()
            self.folded = []
        for k in range(len(self.folded), len(path)):
            previous = None
            if k > 0:
                previous = action_embedding(self.graph, path[k - 1], Action.move(path[k]))
            self.state = self.model.history.fold(self.state, self.graph.node(path[k]).visual_feature, previous)
            self.folded.append(path[k])
        return self.state

    def candidates(self, node: int, actions: Sequence[Action]):
        return candidate_matrix(self.graph, node, actions, self.model.stop_feature)


class SelectorSession(ABC):
    def __init__(self, graph: EnvGraph, episode: Episode):
        self.graph = graph
        self.episode = episode
        self.token_ids = list(episode.instruction.token_ids)

    @abstractmethod
    def score(self, state: AgentState, actions: Sequence[Action]) -> ActionPosterior:
        pass

    def decide(self, state: AgentState, actions: Sequence[Action], forbidden: Iterable[Action] = ()) -> Decision:
        posterior = self.score(state, actions)
        blocked = [k for k, a in enumerate(actions) if a in set(forbidden)]
        index = posterior.argmax(exclude=blocked)
        return Decision(index=index, action=actions[index], posterior=posterior)


class Selector(ABC):
    name = "selector"

    @abstractmethod
    def session(self, graph: EnvGraph, episode: Episode) -> SelectorSession:
        pass


class _FollowerSession(SelectorSession):
    def __init__(self, graph, episode, follower: Follower):
        super().__init__(graph, episode)
        self.tracker = HistoryTracker(follower, graph)
        self.encoded = follower.encode_instruction(self.token_ids)

    def logits(self, state, actions) -> np.ndarray:
        history = self.tracker.sync(state.path)
        candidates = self.tracker.candidates(state.current, actions)
        return as_array(self.tracker.model.logits(history, self.encoded, candidates))

    def score(self, state, actions):
        return ActionPosterior.from_scores(actions, self.logits(state, actions))


class _SpeakerSession(SelectorSession):
    def __init__(self, graph, episode, speaker: Speaker):
        super().__init__(graph, episode)
        self.tracker = HistoryTracker(speaker, graph)

    def lm(self, state, actions) -> np.ndarray:
        history = self.tracker.sync(state.path)
        candidates = self.tracker.candidates(state.current, actions)
        return as_array(lm_scores(self.tracker.model, history, candidates, self.token_ids))

    def score(self, state, actions):
        return ActionPosterior.from_scores(actions, self.lm(state, actions))


class _CombinedSession(SelectorSession):
    def __init__(self, graph, episode, speaker: Speaker, follower: Follower, beta: float):
        super().__init__(graph, episode)
        self.speaker = _SpeakerSession(graph, episode, speaker)
        self.follower = _FollowerSession(graph, episode, follower)
        self.beta = beta

    def score(self, state, actions):
        lm = self.speaker.lm(state, actions)
        logits = self.follower.logits(state, actions)
        return ActionPosterior.from_scores(actions, combine_scores(lm, logits, self.beta))


class DiscriminativeSelector(Selector):
    name = "disc"

    def __init__(self, follower: Follower):
        self.follower = follower

    def session(self, graph, episode):
        return _FollowerSession(graph, episode, self.follower)


class GenerativeSelector(Selector):
    name = "gen"

    def __init__(self, speaker: Speaker):
        self.speaker = speaker

    def session(self, graph, episode):
        return _SpeakerSession(graph, episode, self.speaker)


class CombinedSelector(Selector):
    name = "combined"

    def __init__(self, speaker: Speaker, follower: Follower, beta: float = 0.5):
        check_beta(beta)
        self.speaker = speaker
        self.follower = follower
        self.beta = beta

    def session(self, graph, episode):
        return _CombinedSession(graph, episode, self.speaker, self.follower, self.beta)


class _OracleSession(SelectorSession):
    def __init__(self, graph, episode, fidelity: bool):
        super().__init__(graph, episode)
        self.fidelity = fidelity

    def score(self, state, actions):
        target = reference_teacher(
            self.graph, self.episode.reference_path, self.episode.goal, state.path, self.fidelity
        )
        scores = np.full(len(actions), -np.inf)
        scores[list(actions).index(target)] = 0.0
        return ActionPosterior.from_scores(actions, scores)


class OracleSelector(Selector):
    """Follows the teacher: shortest path to the goal, or the fidelity teacher on r4r episodes."""

    name = "oracle"

    def __init__(self, fidelity: str = "auto"):
        self.fidelity = fidelity

    def session(self, graph, episode):
        fidelity = episode.flavor == "r4r" if self.fidelity == "auto" else self.fidelity == "fidelity"
        return _OracleSession(graph, episode, fidelity)


class _RandomSession(SelectorSession):
    def __init__(self, graph, episode, rng: np.random.Generator):
        super().__init__(graph, episode)
        self.rng = rng

    def score(self, state, actions):
        return ActionPosterior.from_scores(actions, np.zeros(len(actions)))

    def decide(self, state, actions, forbidden=()):
        posterior = self.score(state, actions)
        allowed = [k for k, a in enumerate(actions) if a not in set(forbidden)]
        index = int(allowed[self.rng.integers(len(allowed))])
        return Decision(index=index, action=actions[index], posterior=posterior)


class RandomSelector(Selector):
    """Uniform choice over the action set; the stream is seeded per episode."""

    name = "random"

    def __init__(self, seed: int = 0):
        self.seed = seed

    def session(self, graph, episode):
        rng = np.random.default_rng([self.seed, zlib.crc32(episode.episode_id.encode("utf-8"))])
        return _RandomSession(graph, episode, rng)


SELECTORS: Dict[str, type] = {
    "disc": DiscriminativeSelector,
    "gen": GenerativeSelector,
    "combined": CombinedSelector,
    "oracle": OracleSelector,
    "random": RandomSelector,
}
