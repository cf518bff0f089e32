from dataclasses import dataclass
from typing import List

import numpy as np

from navgen.dataset import Episode
from navgen.models import HistoryState, Speaker, lm_token_logprobs
from navgen.policies import Selector, rollout
from navgen.policies.selectors import HistoryTracker
from navgen.world import Action, EnvGraph


@dataclass
class TentStep:
    t: int
    tokens: List[str]
    entropy: np.ndarray
    action: Action
    n_actions: int

    @property
    def informativeness(self) -> np.ndarray:
        return 1.0 - self.entropy


def token_entropy(token_logprobs) -> np.ndarray:
    """S(w_k) for a (|A|, K) matrix of log p(w_k | a, h, w_<k): entropy of q(., w_k) in base |A|.

    q normalizes the token likelihoods over the actions; with a single action every S is 1.
    """
    logp = np.asarray(token_logprobs, dtype=np.float64)
    n = logp.shape[0]
    if n == 1:
        return np.ones(logp.shape[1])
    shifted = logp - logp.max(axis=0, keepdims=True)
    q = np.exp(shifted)
    q = q / q.sum(axis=0, keepdims=True)
    plogp = np.where(q > 0, q * np.log(np.where(q > 0, q, 1.0)), 0.0)
    entropy = np.clip(-plogp.sum(axis=0) / np.log(n), 0.0, 1.0)
    entropy[np.all(logp == logp[0], axis=0)] = 1.0
    return entropy


def tent_step(speaker: Speaker, history: HistoryState, candidates, token_ids) -> np.ndarray:
    return token_entropy(lm_token_logprobs(speaker, history, candidates, token_ids).data)


def tent_trace(
    speaker: Speaker, graph: EnvGraph, episode: Episode, selector: Selector, vocab=None, max_steps=None
) -> List[TentStep]:
    """Roll ``selector`` on the episode and record the speaker's token entropies before every decision."""
    tracker = HistoryTracker(speaker, graph)
    token_ids = list(episode.instruction.token_ids)
    words = (vocab.decode([i]) if vocab is not None else str(i) for i in token_ids[1:])
    tokens = [w if w else "<eos>" for w in words]
    profile: List[TentStep] = []

    def record(state, actions, decision, session):
        history = tracker.sync(state.path)
        entropy = tent_step(speaker, history, tracker.candidates(state.current, actions), token_ids)
        profile.append(
            TentStep(t=state.t, tokens=tokens, entropy=entropy, action=decision.action, n_actions=len(actions))
        )

    rollout(selector, graph, episode, max_steps=max_steps, on_step=record)
    return profile
