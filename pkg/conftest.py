import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent / "src"))

from navgen.dataset import DataParams, Episode, build_dataset  # noqa: E402
from navgen.instructions import DEFAULT_VOCAB, generate_instruction  # noqa: E402
from navgen.models import ModelConfig, build_model  # noqa: E402
from navgen.world import EnvGraph, Node, WorldParams, shortest_path  # noqa: E402


FEATURE_DIM = 8


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow training experiments")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long training experiments, enabled with --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def make_graph(positions, edges, env_id="env-test", rooms=None, seed=0):
    """Hand-built world; positions are (x, y) or (x, y, z)."""
    rng = np.random.default_rng(seed)
    nodes = []
    for i, pos in enumerate(positions):
        pos = tuple(float(x) for x in pos) + (0.0,) * (3 - len(pos))
        room = rooms[i] if rooms else ("kitchen" if i % 2 == 0 else "hallway")
        nodes.append(Node(i, pos, room, (), rng.normal(size=FEATURE_DIM)))
    return EnvGraph.from_edges(env_id, nodes, edges)


def make_episode(
    graph, path=None, start=None, goal=None, flavor="r2r", split="val_seen", episode_id="ep-0", style="terse"
):
    if path is None:
        path, _ = shortest_path(graph, start, goal)
    path = list(path)
    return Episode(
        episode_id=episode_id,
        path_id=episode_id,
        env_id=graph.env_id,
        start=path[0],
        goal=path[-1],
        reference_path=path,
        instruction=generate_instruction(graph, path, style, seed=0),
        split=split,
        flavor=flavor,
    )


@pytest.fixture
def line_graph():
    """0 - 1 - 2 - 3 - 4 along +y, unit edges."""
    return make_graph([(0, i) for i in range(5)], [(i, i + 1) for i in range(4)], env_id="env-line")


@pytest.fixture
def square_graph():
    """Unit square 0-1-2-3 with a tail 3-4."""
    return make_graph(
        [(0, 0), (1, 0), (1, 1), (0, 1), (0, 2)],
        [(0, 1), (1, 2), (2, 3), (3, 0), (3, 4)],
        env_id="env-square",
    )


@pytest.fixture(scope="session")
def small_params():
    return DataParams(
        n_worlds=4,
        unseen_worlds=1,
        world=WorldParams(n_nodes=12, feature_dim=FEATURE_DIM),
        train_trajectories=8,
        val_seen_trajectories=3,
        val_unseen_trajectories=3,
        min_hops=2,
        max_hops=4,
    )


@pytest.fixture(scope="session")
def small_manifest(small_params):
    return build_dataset(small_params, seed=3)


def tiny_model(kind, hidden=8, seed=0, vocab_size=None):
    config = ModelConfig(
        kind=kind,
        hidden=hidden,
        token_dim=6,
        feature_dim=FEATURE_DIM,
        vocab_size=vocab_size or len(DEFAULT_VOCAB),
        seed=seed,
    )
    return build_model(config)


@pytest.fixture
def speaker():
    return tiny_model("gen")


@pytest.fixture
def follower():
    return tiny_model("disc")
