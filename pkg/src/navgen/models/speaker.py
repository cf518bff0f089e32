from typing import List, Sequence, Tuple

import numpy as np

from navgen.errors import ShapeError
from navgen.models.config import ModelConfig
from navgen.models.history import HistoryEncoder, HistoryState
from navgen.ndgrad import (
    Embedding,
    GRUCell,
    Linear,
    Module,
    Tensor,
    concat,
    log_softmax,
    matmul,
    parameter,
    slice,
    softmax,
    sum,
    tanh,
    transpose,
)


class Speaker(Module):
    """Action-conditioned language model p(X | a, h_t) used as a generative policy through Bayes' rule.

    One linear layer maps [h_t; action embedding] to the initial LM state. Every decoding step attends
    over the per-step history memory. The output layer starts at zero so an untrained model is uniform.
    """

    kind = "gen"

    def __init__(self, config: ModelConfig):
        rng = np.random.default_rng(config.seed)
        H = config.hidden
        self.config = config
        self.history = HistoryEncoder(config.feature_dim, H, rng)
        self.stop_feature = parameter(rng.normal(0.0, 0.1, size=config.feature_dim), "stop_feature")
        self.condition = Linear(H + config.action_dim, H, rng)
        self.embed = Embedding(config.vocab_size, config.token_dim, rng)
        self.cell = GRUCell(config.token_dim, H, rng)
        self.attend = Linear(H, H, rng, bias=False)
        self.out = Linear(2 * H, config.vocab_size, rng, zero=True)

    def _check_tokens(self, token_ids: Sequence[int]):
        if len(token_ids) < 2:
            raise ShapeError("an instruction needs at least BOS and EOS")
        if max(token_ids) >= self.config.vocab_size or min(token_ids) < 0:
            raise ShapeError(f"token id outside vocab of size {self.config.vocab_size}")

    def forward(
        self, history: HistoryState, candidates: Tensor, token_ids: Sequence[int], keep_distributions: bool = False
    ) -> Tuple[Tensor, List[Tensor]]:
        """Teacher-forced scoring of every token after BOS, batched over candidate actions.

        Returns the (|A|, L-1) matrix of log p(w_k | a, h_t, w_<k) and, optionally, the full
        (|A|, V) log-distribution at every position.
        """
        self._check_tokens(token_ids)
        n = candidates.shape[0]
        ones = Tensor(np.ones((n, 1)))
        memory = history.memory_matrix()
        state = tanh(self.condition(concat([matmul(ones, history.h), candidates], axis=1)))
        embedded = self.embed(token_ids[:-1])

        picked, distributions = [], []
        for k, target in enumerate(token_ids[1:]):
            state = self.cell(matmul(ones, slice(embedded, 0, k, k + 1)), state)
            attention = softmax(matmul(self.attend(state), transpose(memory)), axis=-1)
            context = matmul(attention, memory)
            logp = log_softmax(self.out(concat([state, context], axis=1)), axis=-1)
            picked.append(slice(logp, 1, target, target + 1))
            if keep_distributions:
                distributions.append(logp)
        return concat(picked, axis=1), distributions


def lm_token_logprobs(model: Speaker, history: HistoryState, candidates: Tensor, token_ids: Sequence[int]) -> Tensor:
    logprobs, _ = model.forward(history, candidates, token_ids)
    return logprobs


def lm_scores(model: Speaker, history: HistoryState, candidates: Tensor, token_ids: Sequence[int]) -> Tensor:
    """log p(X | a, h_t) for every candidate action, shape (|A|,)."""
    return sum(lm_token_logprobs(model, history, candidates, token_ids), axis=1)
