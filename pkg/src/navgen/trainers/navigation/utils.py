import zlib
from typing import Dict, List, Sequence, Tuple

import numpy as np

from navgen.backends.local import LocalRunner
from navgen.dataset import DatasetManifest, Episode
from navgen.metrics import MetricsReport, score_trajectories
from navgen.models import PolicyModel, candidate_matrix
from navgen.ndgrad import Tensor, add
from navgen.policies import ActionPosterior, DiscriminativeSelector, GenerativeSelector, Selector
from navgen.trainers.navigation.losses import mix_next_action, step_loss
from navgen.trainers.navigation.params import TrainConfig
from navgen.trainers.navigation.teachers import reference_teacher
from navgen.world import STOP, Action, EnvGraph, action_embedding, available_actions


TRAIN_LOG = "train_log.jsonl"
CHECKPOINT = "model.ckpt.json"
BEST_CHECKPOINT = "best.ckpt.json"


def selector_for(model: PolicyModel) -> Selector:
    return DiscriminativeSelector(model) if model.kind == "disc" else GenerativeSelector(model)


def episode_rng(seed: int, epoch: int, episode: Episode) -> np.random.Generator:
    return np.random.default_rng([seed, epoch, zlib.crc32(episode.episode_id.encode("utf-8"))])


def episode_loss(
    model: PolicyModel, graph: EnvGraph, episode: Episode, config: TrainConfig, rng: np.random.Generator
) -> Tuple[Tensor, int]:
    """Summed cross-entropy over every decision of one mixed teacher/student rollout.

    r4r episodes under ``supervised`` walk the reference path with teacher forcing only; otherwise the
    agent executes the teacher's or its own sampled action per step and is supervised by the
    shortest-path teacher (r2r) or the fidelity teacher (r4r).
    """
    r4r = episode.flavor == "r4r"
    forced = r4r and config.supervision == "supervised"
    fidelity = r4r and config.supervision == "fidelity"
    max_steps = config.r4r_max_steps if r4r else config.r2r_max_steps
    reference = episode.reference_path
    tokens = list(episode.instruction.token_ids)
    encoded = model.encode_instruction(tokens) if model.kind == "disc" else None

    history = model.history.fold(model.history.initial(), graph.node(episode.start).visual_feature)
    path = [episode.start]
    total, steps = None, 0
    while True:
        node = path[-1]
        actions = available_actions(graph, node)
        if forced:
            k = len(path) - 1
            teacher = STOP if k == len(reference) - 1 else Action.move(reference[k + 1])
        else:
            teacher = reference_teacher(graph, reference, episode.goal, path, fidelity)
        candidates = candidate_matrix(graph, node, actions, model.stop_feature)
        loss, scores = step_loss(model, history, tokens, candidates, actions.index(teacher), encoded=encoded)
        total = loss if total is None else add(total, loss)
        steps += 1

        if forced:
            chosen = teacher
        else:
            chosen = mix_next_action(teacher, ActionPosterior.from_scores(actions, scores.data), config.eta, rng)
        if chosen.is_stop:
            break
        history = model.history.fold(
            history, graph.node(chosen.target).visual_feature, action_embedding(graph, node, chosen)
        )
        path.append(chosen.target)
        if len(path) - 1 >= max_steps:
            break
    return total, steps


def training_episodes(manifest: DatasetManifest, include_augmented: bool, cap=None, seed: int = 0) -> List[Episode]:
    """The training split, or a seeded subset of ``cap`` episodes kept in manifest order."""
    episodes = list(manifest.split("train", include_augmented=include_augmented))
    if cap is None or cap >= len(episodes):
        return episodes
    keep = np.sort(np.random.default_rng([seed, len(episodes)]).permutation(len(episodes))[:cap])
    return [episodes[k] for k in keep]


def evaluate(
    model: PolicyModel,
    manifest: DatasetManifest,
    config: TrainConfig,
    splits: Sequence[str] = ("val_seen", "val_unseen"),
) -> Dict[str, MetricsReport]:
    runner = LocalRunner(jobs=config.jobs)
    selector = selector_for(model)
    reports = {}
    for split in splits:
        episodes = manifest.split(split)
        if config.max_val_episodes is not None:
            episodes = episodes[: config.max_val_episodes]
        if not episodes:
            continue
        trajectories = runner.rollouts(
            selector,
            manifest.worlds,
            episodes,
            max_steps={"r2r": config.r2r_max_steps, "r4r": config.r4r_max_steps},
        )
        reports[split] = score_trajectories(
            manifest.worlds,
            episodes,
            {t.episode_id: t for t in trajectories},
            d_th=config.success_distance,
            meta={"split": split, "policy": model.kind},
        )
    return reports
