"""Experiment runs behind the command line: data generation, evaluation, comparison, TENT and offline scoring."""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import matplotlib.pyplot as plt
import pandas as pd
from pydantic import Field

from navgen import __version__, logger
from navgen.backends.base import AVAILABLE_HARDWARE
from navgen.backends.local import LocalRunner
from navgen.dataset import (
    SPLITS,
    DataParams,
    DatasetManifest,
    build_dataset,
    build_r4r_like,
    generate_worlds,
    load,
    save,
)
from navgen.errors import ConfigError, DataError
from navgen.metrics import (
    METRIC_COLUMNS,
    MetricsReport,
    agreement_curve,
    precision_curve,
    score_trajectories,
    stop_f1_curve,
)
from navgen.models import Follower, Speaker, load_model
from navgen.policies import (
    TRAJ_SUFFIX,
    CombinedSelector,
    OracleSelector,
    RandomSelector,
    Selector,
    Trajectory,
    by_episode,
    load_trajectories,
    save_trajectories,
)
from navgen.tent import render_tent, tent_trace
from navgen.trainers.common import NavGenParams, apply_seed_override
from navgen.trainers.navigation.__main__ import train
from navgen.trainers.navigation.params import TrainConfig
from navgen.trainers.navigation.utils import selector_for
from navgen.utils import PathLike, write_json
from navgen.world import WorldParams, save_world


RUN_STAMP = "run.json"
POLICIES = ("disc", "gen", "combined", "combined+backtrack", "oracle", "random")


class GenWorldsParams(NavGenParams):
    output_dir: str = Field("data/worlds", title="Directory for the generated .world.json files")
    n_worlds: int = Field(26, title="Number of environments")
    n_nodes: int = Field(30, title="Nodes per environment")
    feature_dim: int = Field(32, title="Visual feature size")

    def world_params(self) -> WorldParams:
        return WorldParams(n_nodes=self.n_nodes, feature_dim=self.feature_dim)


class GenDataParams(NavGenParams):
    output_dir: str = Field("data/r2r", title="Dataset directory")
    n_worlds: int = Field(26, title="Number of environments")
    unseen_worlds: int = Field(6, title="Environments held out for val_unseen")
    n_nodes: int = Field(30, title="Nodes per environment")
    feature_dim: int = Field(32, title="Visual feature size")
    train_trajectories: int = Field(700, title="Train trajectories (3 instructions each)")
    val_seen_trajectories: int = Field(100, title="val_seen trajectories")
    val_unseen_trajectories: int = Field(200, title="val_unseen trajectories")
    min_hops: int = Field(4, title="Minimum reference path hops")
    max_hops: int = Field(7, title="Maximum reference path hops")
    max_len: int = Field(32, title="Maximum instruction length")
    augmented: int = Field(0, title="Augmented single-instruction trajectories added to train")
    r4r_output_dir: Optional[str] = Field(None, title="Also write the joined r4r-style dataset here")
    r4r_max_per_split: Optional[int] = Field(None, title="Cap on joined r4r trajectories per split")

    def data_params(self) -> DataParams:
        return DataParams(
            n_worlds=self.n_worlds,
            unseen_worlds=self.unseen_worlds,
            world=WorldParams(n_nodes=self.n_nodes, feature_dim=self.feature_dim),
            train_trajectories=self.train_trajectories,
            val_seen_trajectories=self.val_seen_trajectories,
            val_unseen_trajectories=self.val_unseen_trajectories,
            min_hops=self.min_hops,
            max_hops=self.max_hops,
            max_len=self.max_len,
            augmented=self.augmented,
        )


class _RolloutParams(NavGenParams):
    data_path: str = Field("data/r2r", title="Dataset directory")
    output_dir: str = Field("runs/eval", title="Output directory")
    beta: float = Field(0.5, title="Weight of the generative score in the combined policy")
    success_distance: float = Field(3.0, title="Success threshold d_th")
    r2r_max_steps: int = Field(20, title="Step budget for r2r-flavour episodes")
    r4r_max_steps: int = Field(40, title="Step budget for r4r-flavour episodes")
    resume_score: Literal["logprob", "logit"] = Field("logprob", title="Backtracking snapshot score")
    max_episodes: Optional[int] = Field(None, title="Only use the first N episodes of each split")
    jobs: Optional[int] = Field(None, title="Parallel rollouts (defaults to NAVGEN_JOBS)")
    backend: str = Field("local", title="Rollout backend")

    @property
    def step_budgets(self) -> Dict[str, int]:
        return {"r2r": self.r2r_max_steps, "r4r": self.r4r_max_steps}


class EvalParams(_RolloutParams):
    policy: Literal["disc", "gen", "combined", "combined+backtrack", "oracle", "random"] = Field(
        "gen", title="Policy to roll out"
    )
    ckpt: Optional[str] = Field(None, title="Checkpoint for the disc or gen policy")
    disc_ckpt: Optional[str] = Field(None, title="Follower checkpoint for combined policies")
    gen_ckpt: Optional[str] = Field(None, title="Speaker checkpoint for combined policies")
    split: Literal["train", "val_seen", "val_unseen"] = Field("val_unseen", title="Split to evaluate")


class CompareParams(_RolloutParams):
    output_dir: str = Field("runs/compare", title="Output directory")
    disc_ckpt: str = Field("runs/disc/model.ckpt.json", title="Follower checkpoint")
    gen_ckpt: str = Field("runs/gen/model.ckpt.json", title="Speaker checkpoint")
    splits: List[str] = Field(["val_seen", "val_unseen"], title="Splits to compare on")


class TentParams(NavGenParams):
    data_path: str = Field("data/r2r", title="Dataset directory")
    ckpt: str = Field("runs/gen/model.ckpt.json", title="Speaker checkpoint")
    output_dir: str = Field("runs/tent", title="Output directory")
    split: Literal["train", "val_seen", "val_unseen"] = Field("val_seen", title="Split to draw episodes from")
    episode: Optional[str] = Field(None, title="Episode id (defaults to the first episodes of the split)")
    n_episodes: int = Field(1, title="Number of episodes when no id is given")
    max_steps: Optional[int] = Field(None, title="Step budget (defaults by flavour)")


class ScoreParams(NavGenParams):
    trajectories: str = Field("runs/eval/val_unseen.traj.jsonl", title="Trajectory file")
    data_path: str = Field("data/r2r", title="Dataset directory")
    output_dir: Optional[str] = Field(None, title="Output directory (defaults to the trajectory directory)")
    success_distance: float = Field(3.0, title="Success threshold d_th")


RunParams = Union[GenWorldsParams, GenDataParams, TrainConfig, EvalParams, CompareParams, TentParams, ScoreParams]


def stamp_run(params: NavGenParams, output_dir: PathLike, **extra) -> Path:
    path = Path(output_dir) / RUN_STAMP
    write_json(
        path,
        {"navgen": __version__, "config": params.resolved(), "config_hash": params.config_hash(), **extra},
    )
    return path


def _load_policy_model(path: Optional[str], manifest: DatasetManifest, kind: str):
    if not path:
        raise ConfigError(f"a {kind} checkpoint is required")
    model, _ = load_model(path, vocab_hash=manifest.vocab.hash)
    expected = Follower if kind == "disc" else Speaker
    if not isinstance(model, expected):
        raise ConfigError(f"{path} holds a {model.kind} model, expected {kind}")
    return model


def build_selector(
    params: Union[EvalParams, CompareParams], policy: str, manifest: DatasetManifest
) -> Tuple[Selector, bool]:
    """Return the selector for ``policy`` and whether it runs with backtracking."""
    if policy == "oracle":
        return OracleSelector(), False
    if policy == "random":
        return RandomSelector(params.seed), False
    if policy in ("disc", "gen"):
        path = getattr(params, f"{policy}_ckpt", None) or getattr(params, "ckpt", None)
        return selector_for(_load_policy_model(path, manifest, policy)), False
    if policy in ("combined", "combined+backtrack"):
        speaker = _load_policy_model(params.gen_ckpt, manifest, "gen")
        follower = _load_policy_model(params.disc_ckpt, manifest, "disc")
        return CombinedSelector(speaker, follower, params.beta), policy == "combined+backtrack"
    raise ConfigError(f"unknown policy {policy!r}; expected one of {POLICIES}")


def _episodes(manifest: DatasetManifest, split: str, cap: Optional[int]):
    episodes = manifest.split(split)
    if cap is not None:
        episodes = episodes[:cap]
    if not episodes:
        raise DataError(f"split {split} has no episodes")
    return episodes


def evaluate_policy(
    params: Union[EvalParams, CompareParams], manifest: DatasetManifest, policy: str, split: str
) -> Tuple[List[Trajectory], MetricsReport]:
    selector, backtrack = build_selector(params, policy, manifest)
    episodes = _episodes(manifest, split, params.max_episodes)
    runner = LocalRunner(jobs=params.jobs, backend=params.backend)
    trajectories = runner.rollouts(
        selector, manifest.worlds, episodes, params.step_budgets, backtrack=backtrack, resume_score=params.resume_score
    )
    report = score_trajectories(
        manifest.worlds,
        episodes,
        by_episode(trajectories),
        params.success_distance,
        meta={"policy": policy, "split": split, "config_hash": params.config_hash()},
    )
    return trajectories, report


def run_gen_worlds(params: GenWorldsParams) -> Path:
    out = Path(params.output_dir)
    for graph in generate_worlds(params.n_worlds, params.seed, params.world_params()):
        save_world(graph, out)
    stamp_run(params, out)
    logger.info(f"Wrote {params.n_worlds} worlds to {out}")
    return out


def run_gen_data(params: GenDataParams) -> Path:
    manifest = build_dataset(params.data_params(), params.seed)
    out = save(manifest, params.output_dir)
    stamp_run(params, out)
    if params.r4r_output_dir is not None:
        r4r = build_r4r_like(manifest, params.seed + 2, params.r4r_max_per_split)
        save(r4r, params.r4r_output_dir)
        stamp_run(params, params.r4r_output_dir)
    return out


def run_train(params: TrainConfig) -> Path:
    result = train(params)
    stamp_run(params, params.run_dir, best_epoch=result.best_epoch)
    return result.checkpoint


def run_eval(params: EvalParams) -> Path:
    manifest = load(params.data_path)
    trajectories, report = evaluate_policy(params, manifest, params.policy, params.split)
    out = Path(params.output_dir)
    save_trajectories(out / f"{params.split}{TRAJ_SUFFIX}", trajectories, params.config_hash())
    report.save(out, stem="metrics")
    stamp_run(params, out)
    row = report.aggregate()
    logger.info(f"{params.policy} on {params.split}: " + ", ".join(f"{k}={row[k]:.3f}" for k in METRIC_COLUMNS))
    return out


def _plot_curves(frame: pd.DataFrame, value: str, path: Path, title: str):
    plt.rcParams["svg.hashsalt"] = "navgen-curves"
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, group in frame.groupby("series", sort=True):
        ax.plot(group["t"], group[value], marker="o", linestyle="--" if "on_reference" in label else "-", label=label)
    ax.set_xlabel("t")
    ax.set_ylabel(value)
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def run_compare(params: CompareParams) -> Path:
    """Table of every policy variant on every split, plus the per-timestep behaviour curves."""
    manifest = load(params.data_path)
    out = Path(params.output_dir)
    rows = []
    for split in params.splits:
        if split not in SPLITS:
            raise ConfigError(f"unknown split {split!r}")
        for policy in ("disc", "gen", "combined", "combined+backtrack"):
            trajectories, report = evaluate_policy(params, manifest, policy, split)
            traj_path = out / policy.replace("+", "-") / f"{split}{TRAJ_SUFFIX}"
            save_trajectories(traj_path, trajectories, params.config_hash())
            rows.append({"policy": policy, "split": split, **report.aggregate()})
    table = pd.DataFrame(rows, columns=["policy", "split", *METRIC_COLUMNS])
    out.mkdir(parents=True, exist_ok=True)
    table.to_csv(out / "table.csv", index=False, float_format="%.4f")

    disc, _ = build_selector(params, "disc", manifest)
    gen, _ = build_selector(params, "gen", manifest)
    precision, agreement, stop = [], [], []
    for split in params.splits:
        episodes = _episodes(manifest, split, params.max_episodes)
        for mode in ("on_reference", "own_rollout"):
            for name, selector in (("disc", disc), ("gen", gen)):
                curve = precision_curve(selector, manifest.worlds, episodes, mode)
                precision.append(curve.assign(series=f"{name}/{mode}", split=split))
                f1 = stop_f1_curve(selector, manifest.worlds, episodes, mode)
                stop.append(f1.assign(series=f"{name}/{mode}", split=split))
            curve = agreement_curve(disc, gen, manifest.worlds, episodes, mode)
            agreement.append(curve.assign(series=f"disc-vs-gen/{mode}", split=split))

    precision, agreement, stop = (pd.concat(frames, ignore_index=True) for frames in (precision, agreement, stop))
    precision.to_csv(out / "precision.csv", index=False, float_format="%.6f")
    agreement.to_csv(out / "agreement.csv", index=False, float_format="%.6f")
    stop.to_csv(out / "stop_f1.csv", index=False, float_format="%.6f")
    shown = params.splits[-1]
    _plot_curves(
        precision[precision["split"] == shown], "precision", out / "precision.svg", f"action precision ({shown})"
    )
    _plot_curves(
        agreement[agreement["split"] == shown], "agreement", out / "agreement.svg", f"disc/gen agreement ({shown})"
    )
    _plot_curves(stop[stop["split"] == shown], "f1", out / "stop_f1.svg", f"STOP F1 ({shown})")
    stamp_run(params, out)
    logger.info(f"Comparison written to {out}")
    return out


def run_tent(params: TentParams) -> Path:
    manifest = load(params.data_path)
    speaker = _load_policy_model(params.ckpt, manifest, "gen")
    selector = selector_for(speaker)
    episodes = manifest.split(params.split)
    if params.episode is not None:
        episodes = [ep for ep in episodes if ep.episode_id == params.episode]
        if not episodes:
            raise DataError(f"episode {params.episode} not found in {params.split}")
    else:
        episodes = episodes[: params.n_episodes]
    out = Path(params.output_dir)
    for ep in episodes:
        profile = tent_trace(speaker, manifest.graph(ep), ep, selector, manifest.vocab, params.max_steps)
        render_tent(profile, out / ep.episode_id if len(episodes) > 1 else out, ep.episode_id)
    stamp_run(params, out)
    return out


def run_score(params: ScoreParams) -> Path:
    manifest = load(params.data_path)
    trajectories = by_episode(load_trajectories(params.trajectories))
    episodes = [ep for split in SPLITS for ep in manifest.split(split) if ep.episode_id in trajectories]
    if len(episodes) != len(trajectories):
        missing = sorted(set(trajectories) - {ep.episode_id for ep in episodes})
        raise DataError(f"trajectories for unknown episodes: {missing[:5]}")
    report = score_trajectories(
        manifest.worlds, episodes, trajectories, params.success_distance, meta={"config_hash": params.config_hash()}
    )
    out = Path(params.output_dir or Path(params.trajectories).parent)
    report.save(out, stem="score")
    stamp_run(params, out)
    return out


RUNNERS = {
    GenWorldsParams: run_gen_worlds,
    GenDataParams: run_gen_data,
    TrainConfig: run_train,
    EvalParams: run_eval,
    CompareParams: run_compare,
    TentParams: run_tent,
    ScoreParams: run_score,
}


@dataclass
class NavGenProject:
    params: RunParams
    backend: str = "local"

    def __post_init__(self):
        if self.backend not in AVAILABLE_HARDWARE:
            raise ConfigError(f"Invalid backend: {self.backend}")

    def create(self) -> Path:
        params = apply_seed_override(self.params)
        runner = RUNNERS.get(type(params))
        if runner is None:
            raise ConfigError(f"Invalid params class {type(params).__name__}")
        return runner(params)
