from typing import Sequence, Tuple

import numpy as np

from navgen.errors import ConfigError, ShapeError
from navgen.models import Follower, HistoryState, PolicyModel, Speaker, lm_scores
from navgen.ndgrad import Tensor, nll
from navgen.policies import ActionPosterior
from navgen.world import Action


def _checked_nll(scores: Tensor, ref_index: int) -> Tensor:
    if not 0 <= ref_index < scores.shape[0]:
        raise ShapeError(f"reference action {ref_index} out of range for {scores.shape[0]} actions")
    return nll(scores, ref_index)


def disc_loss(
    follower: Follower,
    history: HistoryState,
    token_ids,
    candidates: Tensor,
    ref_index: int,
    encoded=None,
    with_scores: bool = False,
):
    """-log softmax(logits)[ref]; pass ``encoded`` to reuse one instruction encoding across steps."""
    if encoded is None:
        encoded = follower.encode_instruction(token_ids)
    logits = follower.logits(history, encoded, candidates)
    loss = _checked_nll(logits, ref_index)
    return (loss, logits) if with_scores else loss


def gen_loss(
    speaker: Speaker,
    history: HistoryState,
    token_ids: Sequence[int],
    candidates: Tensor,
    ref_index: int,
    with_scores: bool = False,
):
    """-[log p(X | a*, h) - logsumexp_a log p(X | a, h)]; every candidate's score receives gradient."""
    scores = lm_scores(speaker, history, candidates, token_ids)
    loss = _checked_nll(scores, ref_index)
    return (loss, scores) if with_scores else loss


def step_loss(
    model: PolicyModel, history: HistoryState, token_ids, candidates: Tensor, ref_index: int, encoded=None
) -> Tuple[Tensor, Tensor]:
    """Loss of one decision together with the per-action scores it was computed from."""
    if model.kind == "disc":
        return disc_loss(model, history, token_ids, candidates, ref_index, encoded=encoded, with_scores=True)
    return gen_loss(model, history, token_ids, candidates, ref_index, with_scores=True)


def mix_next_action(teacher: Action, student_dist: ActionPosterior, eta: float, rng: np.random.Generator) -> Action:
    """a = delta * a_student + (1 - delta) * a_teacher with delta ~ Bernoulli(eta)."""
    if not 0.0 <= eta <= 1.0:
        raise ConfigError(f"eta must lie in [0, 1], got {eta}")
    if rng.random() < eta:
        k = int(rng.choice(len(student_dist.actions), p=student_dist.probs / student_dist.probs.sum()))
        return student_dist.actions[k]
    return teacher
