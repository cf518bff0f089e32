from typing import Sequence

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
    matmul,
    parameter,
    reshape,
    slice,
    softmax,
    tanh,
    transpose,
)


class Follower(Module):
    """Discriminative policy p(a | X, h_t).

    A bidirectional instruction encoder, attention over its states and a bilinear action scorer.
    """

    kind = "disc"

    def __init__(self, config: ModelConfig):
        rng = np.random.default_rng(config.seed)
        H = config.hidden
        self.config = config
        self.history = HistoryEncoder(config.feature_dim, H, rng)
        self.stop_feature = parameter(rng.normal(0.0, 0.1, size=config.feature_dim), "stop_feature")
        self.embed = Embedding(config.vocab_size, config.token_dim, rng)
        self.enc_fwd = GRUCell(config.token_dim, H // 2, rng)
        self.enc_bwd = GRUCell(config.token_dim, H - H // 2, rng)
        self.query = Linear(H, H, rng)
        self.decoder = GRUCell(H, H, rng)
        self.scorer = Linear(2 * H, config.action_dim, rng)

    def encode_instruction(self, token_ids: Sequence[int]) -> Tensor:
        """Per-token encodings (L, H)."""
        if len(token_ids) == 0:
            raise ShapeError("cannot encode an empty instruction")
        if max(token_ids) >= self.config.vocab_size or min(token_ids) < 0:
            raise ShapeError(f"token id outside vocab of size {self.config.vocab_size}")
        emb = self.embed(token_ids)
        L = len(token_ids)

        def run(cell, order):
            h = Tensor(np.zeros((1, cell.hidden)))
            outputs = [None] * L
            for k in order:
                h = cell(slice(emb, 0, k, k + 1), h)
                outputs[k] = h
            return concat(outputs, axis=0)

        forward = run(self.enc_fwd, range(L))
        backward = run(self.enc_bwd, reversed(range(L)))
        return concat([forward, backward], axis=1)

    def logits(self, history: HistoryState, encoded: Tensor, candidates: Tensor) -> Tensor:
        q = tanh(self.query(history.h))
        attention = softmax(matmul(q, transpose(encoded)), axis=-1)
        context = matmul(attention, encoded)
        state = self.decoder(context, history.h)
        projection = self.scorer(concat([state, context], axis=1))
        return reshape(matmul(candidates, transpose(projection)), (candidates.shape[0],))


def follower_logits(model: Follower, history: HistoryState, token_ids: Sequence[int], candidates: Tensor) -> Tensor:
    return model.logits(history, model.encode_instruction(token_ids), candidates)
