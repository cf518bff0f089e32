"""
History encoder, follower and speaker models
"""

import numpy as np
import pytest

from navgen.errors import DataError, ShapeError
from navgen.instructions import DEFAULT_VOCAB, generate_instruction
from navgen.models import candidate_matrix, follower_logits, lm_scores, lm_token_logprobs, load_model, path_history
from navgen.ndgrad import Tape, log_softmax, save_checkpoint, softmax, sum
from navgen.world import available_actions

from conftest import tiny_model


def _setup(model, graph, path):
    history = path_history(model.history, graph, path)
    actions = available_actions(graph, path[-1])
    candidates = candidate_matrix(graph, path[-1], actions, model.stop_feature)
    return history, actions, candidates


def test_history_is_order_sensitive(square_graph, speaker):
    a = path_history(speaker.history, square_graph, [0, 1, 2])
    b = path_history(speaker.history, square_graph, [0, 3, 2])
    assert a.steps == 3
    assert not np.allclose(a.h.data, b.h.data)
    again = path_history(speaker.history, square_graph, [0, 1, 2])
    np.testing.assert_array_equal(a.h.data, again.h.data)


def test_candidate_matrix_rows(square_graph, follower):
    actions = available_actions(square_graph, 3)
    candidates = candidate_matrix(square_graph, 3, actions, follower.stop_feature)
    assert candidates.shape == (len(actions), 4 + square_graph.feature_dim)
    stop_row = [i for i, a in enumerate(actions) if a.is_stop][0]
    np.testing.assert_array_equal(candidates.data[stop_row, :4], [0.0, 1.0, 0.0, 1.0])
    np.testing.assert_array_equal(candidates.data[stop_row, 4:], follower.stop_feature.data)


def test_follower_distribution(square_graph, follower):
    history, actions, candidates = _setup(follower, square_graph, [0, 3])
    token_ids = generate_instruction(square_graph, [0, 3, 4], "terse", seed=0).token_ids
    logits = follower_logits(follower, history, token_ids, candidates)
    assert logits.shape == (len(actions),)
    assert np.all(np.isfinite(logits.data))
    assert softmax(logits).data.sum() == pytest.approx(1.0)


def test_follower_rejects_bad_tokens(square_graph, follower):
    with pytest.raises(ShapeError):
        follower.encode_instruction([])
    with pytest.raises(ShapeError):
        follower.encode_instruction([1, len(DEFAULT_VOCAB), 2])


def test_untrained_speaker_is_uniform(square_graph, speaker):
    history, actions, candidates = _setup(speaker, square_graph, [0, 1])
    token_ids = generate_instruction(square_graph, [0, 1, 2], "verbose", seed=0).token_ids
    logprobs = lm_token_logprobs(speaker, history, candidates, token_ids)
    assert logprobs.shape == (len(actions), len(token_ids) - 1)
    np.testing.assert_allclose(logprobs.data, -np.log(len(DEFAULT_VOCAB)))


def test_speaker_distributions_are_normalised(square_graph):
    model = tiny_model("gen", seed=3)
    rng = np.random.default_rng(0)
    model.out.weight.data = rng.normal(size=model.out.weight.shape)
    history, actions, candidates = _setup(model, square_graph, [0, 1, 2])
    token_ids = generate_instruction(square_graph, [0, 1, 2, 3], "landmark", seed=0).token_ids
    logprobs, distributions = model.forward(history, candidates, token_ids, keep_distributions=True)
    assert len(distributions) == len(token_ids) - 1
    for dist in distributions:
        np.testing.assert_allclose(np.exp(dist.data).sum(axis=1), 1.0)
    scores = lm_scores(model, history, candidates, token_ids)
    assert np.all(scores.data <= 0.0)
    np.testing.assert_allclose(scores.data, logprobs.data.sum(axis=1))
    assert not np.allclose(scores.data, scores.data[0])


def test_speaker_rejects_bad_tokens(square_graph, speaker):
    history, _, candidates = _setup(speaker, square_graph, [0])
    with pytest.raises(ShapeError):
        lm_scores(speaker, history, candidates, [1])
    with pytest.raises(ShapeError):
        lm_scores(speaker, history, candidates, [1, len(DEFAULT_VOCAB), 2])


@pytest.mark.parametrize("kind", ["disc", "gen"])
def test_gradient_spot_check(square_graph, kind):
    model = tiny_model(kind, hidden=6, seed=1)
    if kind == "gen":
        model.out.weight.data = np.random.default_rng(2).normal(0.0, 0.3, size=model.out.weight.shape)
    token_ids = generate_instruction(square_graph, [0, 1, 2], "terse", seed=0).token_ids

    def loss():
        history, _, candidates = _setup(model, square_graph, [0, 1])
        if kind == "gen":
            scores = lm_scores(model, history, candidates, token_ids)
        else:
            scores = follower_logits(model, history, token_ids, candidates)
        return -sum(log_softmax(scores) * np.array([0.0, 1.0, 0.0]))

    model.zero_grad()
    with Tape() as tape:
        tape.backward(loss())
    rng = np.random.default_rng(5)
    eps = 1e-6
    for name, p in model.named_parameters():
        idx = tuple(int(rng.integers(n)) for n in p.shape)
        old = p.data[idx]
        p.data[idx] = old + eps
        up = loss().item()
        p.data[idx] = old - eps
        down = loss().item()
        p.data[idx] = old
        numeric = (up - down) / (2 * eps)
        analytic = 0.0 if p.grad is None else p.grad[idx]
        assert abs(analytic - numeric) <= 1e-4 * max(1.0, abs(numeric)), name


def test_load_model_round_trip(tmp_path, speaker):
    path = save_checkpoint(tmp_path / "gen.ckpt.json", speaker, speaker.config.model_dump(), DEFAULT_VOCAB.hash, "c")
    model, doc = load_model(path, vocab_hash=DEFAULT_VOCAB.hash)
    assert model.kind == "gen"
    assert doc["config_hash"] == "c"
    for (_, a), (_, b) in zip(speaker.named_parameters(), model.named_parameters()):
        np.testing.assert_array_equal(a.data, b.data)
    with pytest.raises(DataError):
        load_model(path, vocab_hash="0" * 16)
