"""
Environment graph, agent stepping and world generation
"""

import math

import numpy as np
import pytest

from conftest import make_graph
from navgen.errors import ConfigError, IllegalActionError, UnknownNodeError, UnreachableError
from navgen.world import (
    STOP,
    Action,
    AgentState,
    action_embedding,
    available_actions,
    generate_world,
    heading_elevation,
    load_world,
    make_world_params,
    path_length,
    save_world,
    shortest_path,
    step,
    WorldParams,
)


def test_shortest_path_and_lengths(line_graph):
    path, length = shortest_path(line_graph, 0, 4)
    assert path == [0, 1, 2, 3, 4]
    assert length == pytest.approx(4.0)
    assert path_length(line_graph, path) == pytest.approx(4.0)
    assert path_length(line_graph, [2]) == 0.0
    assert shortest_path(line_graph, 3, 3) == ([3], 0.0)


def test_shortest_path_ties_prefer_smaller_ids(square_graph):
    path, length = shortest_path(square_graph, 0, 2)
    assert length == pytest.approx(2.0)
    assert path == [0, 1, 2]


def test_unknown_and_unreachable_nodes():
    graph = make_graph([(0, 0), (0, 1), (5, 5)], [(0, 1)])
    with pytest.raises(UnknownNodeError):
        shortest_path(graph, 0, 9)
    with pytest.raises(UnreachableError):
        shortest_path(graph, 0, 2)
    with pytest.raises(UnreachableError):
        graph.distance(0, 2)
    assert not graph.is_connected()


def test_action_order_and_stepping(square_graph):
    actions = available_actions(square_graph, 3)
    assert actions == [Action.move(0), Action.move(2), Action.move(4), STOP]
    state = AgentState(env_id=square_graph.env_id, current=0)
    state = step(square_graph, state, Action.move(1))
    assert state.current == 1 and state.t == 1 and state.path == [0, 1]
    with pytest.raises(IllegalActionError):
        step(square_graph, state, Action.move(3))
    stopped = step(square_graph, state, STOP)
    assert stopped.terminated and stopped.current == 1 and stopped.t == 1
    with pytest.raises(IllegalActionError):
        step(square_graph, stopped, Action.move(2))


def test_step_from_unknown_node(square_graph):
    lost = AgentState(env_id=square_graph.env_id, current=42)
    for action in (Action.move(1), STOP):
        with pytest.raises(UnknownNodeError):
            step(square_graph, lost, action)
    with pytest.raises(UnknownNodeError):
        available_actions(square_graph, 42)


def test_heading_convention():
    graph = make_graph([(0, 0), (0, 1), (-1, 0), (1, 0, 1)], [(0, 1), (0, 2), (0, 3)])
    north, _ = heading_elevation(graph, 0, 1)
    west, _ = heading_elevation(graph, 0, 2)
    east, climb = heading_elevation(graph, 0, 3)
    assert north == pytest.approx(0.0)
    assert west == pytest.approx(math.pi / 2)
    assert east == pytest.approx(-math.pi / 2)
    assert climb == pytest.approx(math.pi / 4)


def test_action_embedding_layout(line_graph):
    emb = action_embedding(line_graph, 0, Action.move(1))
    assert emb.vector.shape == (4 + line_graph.feature_dim,)
    np.testing.assert_allclose(emb.orientation, [0.0, 1.0, 0.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(emb.target_feature, line_graph.node(1).visual_feature)
    stop = action_embedding(line_graph, 0, STOP, stop_feature=np.ones(line_graph.feature_dim))
    np.testing.assert_allclose(stop.target_feature, 1.0)
    with pytest.raises(IllegalActionError):
        action_embedding(line_graph, 0, Action.move(3))


def test_generated_worlds_are_connected_and_deterministic():
    params = WorldParams(n_nodes=20, feature_dim=8)
    a = generate_world(11, params)
    b = generate_world(11, params)
    c = generate_world(12, params)
    assert a == b
    assert a != c
    assert a.env_id == "env-00011"
    assert len(a) == 20 and a.is_connected()
    assert a.feature_dim == 8
    for u, v, w in a.edges():
        assert w > 0
        assert a.edge_length(v, u) == w


def test_world_params_bounds():
    with pytest.raises(ConfigError):
        make_world_params(n_nodes=4)
    with pytest.raises(ConfigError):
        make_world_params(feature_dim=4)
    with pytest.raises(ConfigError):
        make_world_params(room_labels=("castle",))


def test_world_file_round_trip(tmp_path):
    graph = generate_world(5, WorldParams(n_nodes=15, feature_dim=8))
    path = save_world(graph, tmp_path)
    assert path.name == f"{graph.env_id}.world.json"
    assert load_world(path) == graph


def test_distance_matrix_matches_dijkstra():
    graph = generate_world(8, WorldParams(n_nodes=16, feature_dim=8))
    nodes = sorted(graph.adjacency)
    table = graph.distance_matrix(nodes, nodes)
    for u in nodes[:5]:
        for v in nodes:
            assert table[u, v] == pytest.approx(shortest_path(graph, u, v)[1], abs=1e-9)
