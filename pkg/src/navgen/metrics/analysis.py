"""Per-timestep behaviour analyses: action precision against the teacher, agreement between two
policies, and how well the STOP decision matches the teacher's."""

from collections import defaultdict
from typing import Callable, Dict, List, Literal, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from sklearn.metrics import precision_recall_fscore_support

from navgen.dataset import Episode
from navgen.errors import ConfigError
from navgen.policies import Selector, SelectorSession, rollout
from navgen.trainers.navigation.teachers import reference_teacher
from navgen.world import Action, AgentState, EnvGraph, available_actions


Mode = Literal["on_reference", "own_rollout"]
MODES = ("on_reference", "own_rollout")


def _reference_state(episode: Episode, t: int) -> AgentState:
    path = episode.reference_path
    return AgentState(
        env_id=episode.env_id,
        current=path[t],
        t=t,
        history=list(path[:t]),
        actions=[Action.move(v) for v in path[1 : t + 1]],
    )


def _teacher(graph: EnvGraph, episode: Episode, state: AgentState) -> Action:
    return reference_teacher(graph, episode.reference_path, episode.goal, state.path, episode.flavor == "r4r")


def visit_states(
    selector: Selector,
    worlds: Mapping[str, EnvGraph],
    episodes: Sequence[Episode],
    mode: Mode,
    visit: Callable[[Episode, EnvGraph, AgentState, List[Action], Action, SelectorSession], None],
):
    """Call ``visit(episode, graph, state, actions, chosen, session)`` at every decision state.

    ``on_reference`` walks the gold path; ``own_rollout`` follows ``selector``'s own decisions.
    """
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    for ep in episodes:
        graph = worlds[ep.env_id]
        if mode == "on_reference":
            session = selector.session(graph, ep)
            for t in range(len(ep.reference_path)):
                state = _reference_state(ep, t)
                actions = available_actions(graph, state.current)
                visit(ep, graph, state, actions, session.decide(state, actions).action, session)
        else:
            rollout(
                selector,
                graph,
                ep,
                on_step=lambda state, actions, decision, session, ep=ep, graph=graph: visit(
                    ep, graph, state, actions, decision.action, session
                ),
            )


def _curve(buckets: Dict[int, List[float]], name: str) -> pd.DataFrame:
    rows = [{"t": t, name: float(np.mean(v)), "count": len(v)} for t, v in sorted(buckets.items())]
    return pd.DataFrame(rows, columns=["t", name, "count"])


def precision_curve(
    selector: Selector, worlds: Mapping[str, EnvGraph], episodes: Sequence[Episode], mode: Mode = "on_reference"
) -> pd.DataFrame:
    buckets: Dict[int, List[float]] = defaultdict(list)

    def visit(ep, graph, state, actions, chosen, session):
        buckets[state.t].append(float(chosen == _teacher(graph, ep, state)))

    visit_states(selector, worlds, episodes, mode, visit)
    return _curve(buckets, "precision")


def agreement_curve(
    selector_a: Selector,
    selector_b: Selector,
    worlds: Mapping[str, EnvGraph],
    episodes: Sequence[Episode],
    mode: Mode = "on_reference",
) -> pd.DataFrame:
    """Rate at which ``selector_b`` picks the same action as ``selector_a``; rollouts follow ``selector_a``."""
    buckets: Dict[int, List[float]] = defaultdict(list)
    sessions: Dict[str, SelectorSession] = {}

    def visit(ep, graph, state, actions, chosen, session):
        other = sessions.setdefault(ep.episode_id, selector_b.session(graph, ep))
        buckets[state.t].append(float(chosen == other.decide(state, actions).action))

    visit_states(selector_a, worlds, episodes, mode, visit)
    return _curve(buckets, "agreement")


def stop_f1_curve(
    selector: Selector,
    worlds: Mapping[str, EnvGraph],
    episodes: Sequence[Episode],
    mode: Mode = "on_reference",
    max_t: Optional[int] = None,
) -> pd.DataFrame:
    gold: Dict[int, List[int]] = defaultdict(list)
    predicted: Dict[int, List[int]] = defaultdict(list)

    def visit(ep, graph, state, actions, chosen, session):
        if max_t is not None and state.t > max_t:
            return
        gold[state.t].append(int(_teacher(graph, ep, state).is_stop))
        predicted[state.t].append(int(chosen.is_stop))

    visit_states(selector, worlds, episodes, mode, visit)
    rows = []
    for t in sorted(gold):
        p, r, f, _ = precision_recall_fscore_support(
            gold[t], predicted[t], average="binary", pos_label=1, zero_division=0
        )
        rows.append({"t": t, "precision": float(p), "recall": float(r), "f1": float(f), "count": len(gold[t])})
    return pd.DataFrame(rows, columns=["t", "precision", "recall", "f1", "count"])
