from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np

from navgen.errors import ConfigError, ShapeError
from navgen.models import Follower, HistoryState, Speaker, follower_logits, lm_scores
from navgen.ndgrad import Tensor
from navgen.world import Action


def _logsumexp(scores: np.ndarray) -> float:
    m = np.max(scores)
    return float(m + np.log(np.sum(np.exp(scores - m))))


def log_normalize(scores) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    return scores - _logsumexp(scores)


def first_argmax(scores, exclude: Iterable[int] = ()) -> int:
    """Index of the largest score; ties go to the lowest index."""
    scores = np.asarray(scores, dtype=np.float64)
    excluded = set(exclude)
    best = None
    for k, value in enumerate(scores):
        if k in excluded:
            continue
        if best is None or value > scores[best]:
            best = k
    if best is None:
        raise ShapeError("every action is excluded")
    return best


@dataclass
class ActionPosterior:
    """Distribution over the ordered action set together with the scores it was normalized from."""

    actions: List[Action]
    scores: np.ndarray
    log_probs: np.ndarray
    probs: np.ndarray

    @classmethod
    def from_scores(cls, actions: Sequence[Action], scores) -> "ActionPosterior":
        scores = np.asarray(scores, dtype=np.float64).reshape(-1)
        if len(actions) == 0 or scores.shape[0] != len(actions):
            raise ShapeError(f"{scores.shape[0]} scores for {len(actions)} actions")
        log_probs = log_normalize(scores)
        return cls(actions=list(actions), scores=scores, log_probs=log_probs, probs=np.exp(log_probs))

    def __len__(self):
        return len(self.actions)

    def argmax(self, exclude: Iterable[int] = ()) -> int:
        return first_argmax(self.scores, exclude)

    def index(self, action: Action) -> int:
        return self.actions.index(action)


def check_beta(beta: float):
    if not 0.0 <= beta <= 1.0:
        raise ConfigError(f"beta must lie in [0, 1], got {beta}")


def combine_scores(lm, disc_logits, beta: float) -> np.ndarray:
    """beta * log p(X | a, h) + (1 - beta) * log p_f(a | X, h)."""
    check_beta(beta)
    return beta * np.asarray(lm, dtype=np.float64) + (1.0 - beta) * log_normalize(disc_logits)


def as_array(t) -> np.ndarray:
    return t.data if isinstance(t, Tensor) else np.asarray(t, dtype=np.float64)


def disc_action_dist(
    follower: Follower, history: HistoryState, token_ids: Sequence[int], actions: Sequence[Action], candidates
) -> ActionPosterior:
    return ActionPosterior.from_scores(actions, as_array(follower_logits(follower, history, token_ids, candidates)))


def gen_action_posterior(
    speaker: Speaker, history: HistoryState, token_ids: Sequence[int], actions: Sequence[Action], candidates
) -> ActionPosterior:
    """Bayes' rule with a uniform action prior: p(a | h, X) is p(X | a, h) normalized over the actions."""
    return ActionPosterior.from_scores(actions, as_array(lm_scores(speaker, history, candidates, token_ids)))


def gen_select(speaker: Speaker, history: HistoryState, token_ids, actions, candidates) -> Action:
    posterior = gen_action_posterior(speaker, history, token_ids, actions, candidates)
    return actions[posterior.argmax()]


def combined_select(
    speaker: Speaker,
    follower: Follower,
    speaker_history: HistoryState,
    follower_history: HistoryState,
    token_ids: Sequence[int],
    actions: Sequence[Action],
    speaker_candidates,
    follower_candidates,
    beta: float,
) -> Action:
    check_beta(beta)
    lm = as_array(lm_scores(speaker, speaker_history, speaker_candidates, token_ids))
    logits = as_array(follower_logits(follower, follower_history, token_ids, follower_candidates))
    return actions[first_argmax(combine_scores(lm, logits, beta))]
