"""
Action posteriors, selectors and rollouts
"""

import numpy as np
import pytest

from navgen.backends.local import LocalRunner
from navgen.errors import ConfigError, DataError, ShapeError
from navgen.models import candidate_matrix, path_history
from navgen.policies import (
    ActionPosterior,
    CombinedSelector,
    OracleSelector,
    RandomSelector,
    Selector,
    SelectorSession,
    Trajectory,
    backtracking_rollout,
    by_episode,
    combine_scores,
    combined_select,
    disc_action_dist,
    first_argmax,
    gen_action_posterior,
    gen_select,
    load_trajectories,
    rollout,
    save_trajectories,
)
from navgen.world import STOP, Action, available_actions, path_length

from conftest import make_episode, make_graph


def test_posterior_from_log_likelihoods():
    posterior = ActionPosterior.from_scores([Action.move(1), STOP], [np.log(0.2), np.log(0.1)])
    np.testing.assert_allclose(posterior.probs, [2 / 3, 1 / 3])
    assert posterior.argmax() == 0
    shifted = ActionPosterior.from_scores([Action.move(1), STOP], [np.log(0.2) + 7.0, np.log(0.1) + 7.0])
    np.testing.assert_allclose(shifted.probs, posterior.probs)


def test_posterior_shape_mismatch():
    with pytest.raises(ShapeError):
        ActionPosterior.from_scores([STOP], [0.0, 1.0])


def test_first_argmax_prefers_lowest_index():
    assert first_argmax([1.0, 3.0, 3.0]) == 1
    assert first_argmax([1.0, 3.0, 3.0], exclude=[1]) == 2
    with pytest.raises(ShapeError):
        first_argmax([1.0], exclude=[0])


def test_combined_scores():
    scores = combine_scores([-1.0, -2.0], [-2.0, -0.2], beta=0.5)
    assert first_argmax(scores) == 1
    rng = np.random.default_rng(0)
    lm, logits = rng.normal(size=5), rng.normal(size=5)
    assert first_argmax(combine_scores(lm, logits, 1.0)) == first_argmax(lm)
    assert first_argmax(combine_scores(lm, logits, 0.0)) == first_argmax(logits)
    with pytest.raises(ConfigError):
        combine_scores(lm, logits, 1.5)
    with pytest.raises(ConfigError):
        CombinedSelector(None, None, beta=-0.1)


def test_policy_selects_with_real_models(square_graph, speaker, follower):
    path = [0, 1]
    actions = available_actions(square_graph, 1)
    token_ids = make_episode(square_graph, path=[0, 1, 2]).instruction.token_ids
    s_hist = path_history(speaker.history, square_graph, path)
    f_hist = path_history(follower.history, square_graph, path)
    s_cand = candidate_matrix(square_graph, 1, actions, speaker.stop_feature)
    f_cand = candidate_matrix(square_graph, 1, actions, follower.stop_feature)

    gen = gen_action_posterior(speaker, s_hist, token_ids, actions, s_cand)
    disc = disc_action_dist(follower, f_hist, token_ids, actions, f_cand)
    assert gen.probs.sum() == pytest.approx(1.0)
    assert disc.probs.sum() == pytest.approx(1.0)
    assert gen_select(speaker, s_hist, token_ids, actions, s_cand) == actions[gen.argmax()]
    args = (speaker, follower, s_hist, f_hist, token_ids, actions, s_cand, f_cand)
    assert combined_select(*args, beta=1.0) == actions[gen.argmax()]
    assert combined_select(*args, beta=0.0) == actions[disc.argmax()]


def test_oracle_rollout_follows_reference(small_manifest):
    for ep in small_manifest.split("val_seen"):
        graph = small_manifest.graph(ep)
        traj = rollout(OracleSelector(), graph, ep)
        assert traj.nodes == ep.reference_path
        assert traj.stopped and not traj.forced
        assert traj.actions[-1] == STOP
        assert traj.steps == len(ep.reference_path) - 1


def test_budget_forces_a_stop(line_graph):
    ep = make_episode(line_graph, path=[0, 1, 2, 3, 4])
    traj = rollout(OracleSelector(), line_graph, ep, max_steps=1)
    assert traj.nodes == [0, 1]
    assert traj.actions == [Action.move(1), STOP]
    assert traj.forced and not traj.stopped
    with pytest.raises(ConfigError):
        rollout(OracleSelector(), line_graph, ep, max_steps=0)


def test_random_selector_is_seeded(small_manifest):
    ep = small_manifest.split("val_unseen")[0]
    graph = small_manifest.graph(ep)
    first = rollout(RandomSelector(seed=4), graph, ep)
    again = rollout(RandomSelector(seed=4), graph, ep)
    assert first == again
    first.validate(graph)


class ScriptedSession(SelectorSession):
    """Scores actions by a fixed per-node preference order."""

    PREFERENCES = {0: [1, 3], 1: [2], 2: [1], 3: ["stop"]}

    def score(self, state, actions):
        if state.current == 1 and state.path.count(1) > 1:
            order = ["stop"]
        else:
            order = self.PREFERENCES[state.current]
        scores = []
        for action in actions:
            key = "stop" if action.is_stop else action.target
            scores.append(len(order) - order.index(key) if key in order else -5.0)
        return ActionPosterior.from_scores(actions, scores)


class ScriptedSelector(Selector):
    def session(self, graph, episode):
        return ScriptedSession(graph, episode)


@pytest.fixture
def fork_graph():
    return make_graph([(0, 0), (0, 1), (0, 2), (1, 0)], [(0, 1), (1, 2), (0, 3)], env_id="env-fork")


def test_plain_rollout_stops_on_revisit(fork_graph):
    ep = make_episode(fork_graph, path=[0, 3])
    traj = rollout(ScriptedSelector(), fork_graph, ep)
    assert traj.nodes == [0, 1, 2, 1]
    assert path_length(fork_graph, traj.nodes) == pytest.approx(3.0)


def test_backtracking_resumes_at_the_start(fork_graph):
    ep = make_episode(fork_graph, path=[0, 3])
    traj = backtracking_rollout(ScriptedSelector(), fork_graph, ep)
    assert traj.nodes == [0, 1, 2, 1, 0, 3]
    assert traj.backtracks == [3]
    assert traj.stopped
    assert path_length(fork_graph, traj.nodes) == pytest.approx(5.0)
    same = backtracking_rollout(ScriptedSelector(), fork_graph, ep, resume_score="logit")
    assert same.nodes == traj.nodes
    with pytest.raises(ConfigError):
        backtracking_rollout(ScriptedSelector(), fork_graph, ep, resume_score="prob")


def test_backtracking_walk_counts_against_budget(fork_graph):
    ep = make_episode(fork_graph, path=[0, 3])
    traj = backtracking_rollout(ScriptedSelector(), fork_graph, ep, max_steps=4)
    assert traj.nodes == [0, 1, 2, 1, 0]
    assert traj.forced


def test_trajectory_files(tmp_path, small_manifest):
    trajectories = []
    for ep in small_manifest.split("val_seen")[:4]:
        trajectories.append(rollout(RandomSelector(seed=1), small_manifest.graph(ep), ep))
    path = save_trajectories(tmp_path / "val_seen.traj.jsonl", trajectories, config_hash="abc")
    assert load_trajectories(path) == trajectories
    with pytest.raises(DataError):
        by_episode(trajectories + trajectories[:1])


def test_trajectory_record_checks_steps():
    record = Trajectory("ep", [0, 1], [Action.move(1), STOP], stopped=True).to_record()
    record["steps"] = 5
    with pytest.raises(DataError):
        Trajectory.from_record(record)


def test_posterior_matches_argmax_on_random_scores():
    rng = np.random.default_rng(11)
    actions = [Action.move(k) for k in range(5)] + [STOP]
    for _ in range(10_000):
        scores = rng.normal(scale=5.0, size=len(actions))
        posterior = ActionPosterior.from_scores(actions, scores)
        assert abs(posterior.probs.sum() - 1.0) <= 1e-9
        assert posterior.argmax() == int(np.argmax(scores))
    uniform = ActionPosterior.from_scores(actions, np.full(len(actions), -3.7))
    assert np.all(uniform.probs == uniform.probs[0])


def test_parallel_rollouts_keep_order(small_manifest):
    episodes = small_manifest.split("val_unseen")
    serial = LocalRunner(jobs=1).rollouts(RandomSelector(seed=3), small_manifest.worlds, episodes)
    runner = LocalRunner(jobs=2, backend="local-threads")
    threaded = runner.rollouts(RandomSelector(seed=3), small_manifest.worlds, episodes)
    assert threaded == serial
    assert [t.episode_id for t in serial] == [ep.episode_id for ep in episodes]
    with pytest.raises(ConfigError):
        LocalRunner(jobs=0)
    with pytest.raises(ConfigError):
        LocalRunner(backend="cluster")
