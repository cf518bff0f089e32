"""
Token-wise entropy traces and their rendering
"""

import xml.etree.ElementTree as ET

import numpy as np
import pandas as pd
import pytest

from navgen.instructions import DEFAULT_VOCAB
from navgen.policies import GenerativeSelector, OracleSelector
from navgen.tent import render_tent, tent_frame, tent_trace, token_entropy

from conftest import tiny_model


def test_uniform_conditionals_give_one():
    logp = np.tile(np.log([0.1, 0.3, 0.6]), (4, 1))
    np.testing.assert_array_equal(token_entropy(logp), [1.0, 1.0, 1.0])


def test_one_hot_gives_zero():
    logp = np.array([[0.0, -np.inf], [-np.inf, 0.0], [-np.inf, -np.inf]])
    np.testing.assert_array_equal(token_entropy(logp), [0.0, 0.0])


def test_half_split_over_four_actions():
    logp = np.array([[np.log(0.5)], [np.log(0.5)], [-np.inf], [-np.inf]])
    assert token_entropy(logp)[0] == pytest.approx(0.5, abs=1e-12)


def test_single_action_is_fully_uncertain():
    np.testing.assert_array_equal(token_entropy(np.array([[-1.0, -2.0]])), [1.0, 1.0])


def test_entropy_stays_in_unit_interval():
    rng = np.random.default_rng(0)
    for _ in range(100):
        logp = rng.normal(scale=4.0, size=(int(rng.integers(2, 7)), 9))
        s = token_entropy(logp)
        assert np.all((s >= 0.0) & (s <= 1.0))


@pytest.fixture
def trained_looking_speaker():
    model = tiny_model("gen", seed=4)
    model.out.weight.data = np.random.default_rng(1).normal(size=model.out.weight.shape)
    return model


def test_trace_follows_the_rollout(small_manifest, trained_looking_speaker):
    ep = small_manifest.split("val_seen")[0]
    graph = small_manifest.graph(ep)
    profile = tent_trace(trained_looking_speaker, graph, ep, OracleSelector(), vocab=DEFAULT_VOCAB)
    assert [step.t for step in profile] == list(range(len(ep.reference_path)))
    assert profile[-1].action.is_stop
    n_tokens = len(ep.instruction.token_ids) - 1
    for step in profile:
        assert len(step.tokens) == n_tokens == len(step.entropy)
        assert np.all((step.entropy >= 0.0) & (step.entropy <= 1.0))
        np.testing.assert_allclose(step.informativeness, 1.0 - step.entropy)
    assert profile[0].tokens[-1] == "<eos>"
    assert profile[0].tokens[:-1] == ep.instruction.text.split()


def test_render_writes_csv_and_svg(tmp_path, small_manifest, trained_looking_speaker):
    ep = small_manifest.split("val_seen")[1]
    graph = small_manifest.graph(ep)
    selector = GenerativeSelector(trained_looking_speaker)
    profile = tent_trace(trained_looking_speaker, graph, ep, selector, vocab=DEFAULT_VOCAB, max_steps=4)
    files = render_tent(profile, tmp_path / "a", episode_id=ep.episode_id)
    assert [f.name for f in files] == ["tent.csv", "tent.svg"]

    frame = pd.read_csv(tmp_path / "a" / "tent.csv")
    assert list(frame.columns) == ["episode_id", "t", "k", "token", "S", "1-S"]
    assert len(frame) == sum(len(step.tokens) for step in profile)
    np.testing.assert_allclose(frame["S"] + frame["1-S"], 1.0, atol=2e-6)
    assert ET.parse(tmp_path / "a" / "tent.svg").getroot().tag.endswith("svg")

    render_tent(profile, tmp_path / "b", episode_id=ep.episode_id)
    for name in ("tent.csv", "tent.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_empty_profile_writes_nothing(tmp_path):
    assert render_tent([], tmp_path / "none") == []
    assert not (tmp_path / "none").exists()
    assert tent_frame([]).empty
