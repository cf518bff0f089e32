from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from navgen import logger
from navgen.errors import DataError, GenerationError
from navgen.instructions import STYLES, Instruction, Vocab, build_vocab, generate_instruction, join_instructions
from navgen.instructions.vocab import UNK
from navgen.utils import PathLike, read_json, read_jsonl, write_json, write_jsonl
from navgen.world import EnvGraph, WorldParams, generate_world, load_world, save_world, shortest_path
from navgen.world.io import WORLD_SUFFIX


DATA_SCHEMA = "navgen-data/1"
SPLITS = ("train", "val_seen", "val_unseen")

Split = Literal["train", "val_seen", "val_unseen"]
Flavor = Literal["r2r", "r4r", "augmented"]


class Episode(BaseModel):
    model_config = ConfigDict(frozen=True)

    episode_id: str
    path_id: str
    env_id: str
    start: int
    goal: int
    reference_path: List[int]
    instruction: Instruction
    split: Split
    flavor: Flavor

    def max_steps(self, r2r_steps: int = 20, r4r_steps: int = 40) -> int:
        return r4r_steps if self.flavor == "r4r" else r2r_steps


class DataParams(BaseModel):
    n_worlds: int = Field(26, title="Number of generated environments")
    unseen_worlds: int = Field(6, title="Environments held out for val_unseen")
    world: WorldParams = Field(default_factory=WorldParams, title="World generator parameters")
    train_trajectories: int = Field(700, title="Train trajectories (3 instructions each)")
    val_seen_trajectories: int = Field(100, title="val_seen trajectories")
    val_unseen_trajectories: int = Field(200, title="val_unseen trajectories")
    min_hops: int = Field(4, title="Minimum reference path hops")
    max_hops: int = Field(7, title="Maximum reference path hops")
    max_len: int = Field(32, title="Maximum instruction length including BOS/EOS")
    augmented: int = Field(0, title="Number of augmented single-instruction trajectories")


@dataclass(eq=True)
class DatasetManifest:
    worlds: Dict[str, EnvGraph]
    episodes: Dict[str, List[Episode]]
    vocab: Vocab
    seeds: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    schema: str = DATA_SCHEMA

    def split(self, name: str, include_augmented: bool = True) -> List[Episode]:
        if name not in SPLITS:
            raise DataError(f"unknown split {name!r}; expected one of {SPLITS}")
        episodes = self.episodes.get(name, [])
        if not include_augmented:
            episodes = [ep for ep in episodes if ep.flavor != "augmented"]
        return episodes

    def env_ids(self, name: str) -> set:
        return {ep.env_id for ep in self.episodes.get(name, [])}

    def graph(self, episode: Episode) -> EnvGraph:
        try:
            return self.worlds[episode.env_id]
        except KeyError:
            raise DataError(f"episode {episode.episode_id} refers to unknown world {episode.env_id}") from None

    def validate(self):
        unseen = self.env_ids("val_unseen")
        overlap = unseen & (self.env_ids("train") | self.env_ids("val_seen"))
        if overlap:
            raise DataError(f"val_unseen shares environments with seen splits: {sorted(overlap)}")
        for episodes in self.episodes.values():
            for ep in episodes:
                graph = self.graph(ep)
                path = ep.reference_path
                if not path or path[0] != ep.start or path[-1] != ep.goal:
                    raise DataError(f"episode {ep.episode_id}: reference path does not join start and goal")
                for u, v in zip(path[:-1], path[1:]):
                    if v not in graph.adjacency.get(u, {}):
                        raise DataError(f"episode {ep.episode_id}: {u}-{v} is not an edge")
                if UNK in ep.instruction.token_ids:
                    raise DataError(f"episode {ep.episode_id}: instruction contains unknown words")
        return self


def generate_worlds(n_worlds: int, seed: int, params: WorldParams) -> List[EnvGraph]:
    seeds = np.random.default_rng(seed).integers(0, 2**31 - 1, size=n_worlds)
    return [generate_world(int(s), params, env_id=f"env-{i:03d}") for i, s in enumerate(seeds)]


def _hop_pairs(graph: EnvGraph, min_hops: int, max_hops: int) -> List[Tuple[str, int, int]]:
    pairs = []
    for u in sorted(graph.adjacency):
        for v in sorted(graph.adjacency):
            if u != v and min_hops <= len(shortest_path(graph, u, v)[0]) - 1 <= max_hops:
                pairs.append((graph.env_id, u, v))
    return pairs


def _sample(pool: Sequence, count: int, rng, what: str) -> list:
    if count > len(pool):
        raise GenerationError(f"requested {count} {what} but only {len(pool)} start/goal pairs fit the hop range")
    return [pool[i] for i in sorted(rng.choice(len(pool), size=count, replace=False))]


def _split_worlds(worlds: Sequence[EnvGraph], unseen_worlds: int, rng):
    if len(worlds) < 3:
        raise GenerationError(f"need at least 3 worlds to hold out an unseen split, got {len(worlds)}")
    ordered = sorted(worlds, key=lambda g: g.env_id)
    n_unseen = min(unseen_worlds, max(1, len(ordered) // 3))
    perm = rng.permutation(len(ordered))
    unseen = sorted((ordered[i] for i in perm[:n_unseen]), key=lambda g: g.env_id)
    seen = sorted((ordered[i] for i in perm[n_unseen:]), key=lambda g: g.env_id)
    return seen, unseen


def _pool(worlds: Iterable[EnvGraph], params: DataParams) -> list:
    pool = []
    for graph in worlds:
        pairs = _hop_pairs(graph, params.min_hops, params.max_hops)
        if not pairs:
            raise GenerationError(
                f"{graph.env_id} has no start/goal pair with {params.min_hops}-{params.max_hops} hops"
            )
        pool.extend(pairs)
    return pool


def _trajectory_episodes(
    worlds: Dict[str, EnvGraph],
    pairs: Sequence[Tuple[str, int, int]],
    split: str,
    flavor: str,
    prefix: str,
    rng,
    styles: Sequence[str],
    max_len: int,
    vocab: Vocab,
    single_style: bool = False,
) -> List[Episode]:
    episodes = []
    for idx, (env_id, start, goal) in enumerate(pairs):
        graph = worlds[env_id]
        path, _ = shortest_path(graph, start, goal)
        instr_seed = int(rng.integers(0, 2**31 - 1))
        chosen = [styles[int(rng.integers(len(styles)))]] if single_style else styles
        path_id = f"{prefix}-{split}-{idx:05d}"
        for style in chosen:
            episodes.append(
                Episode(
                    episode_id=f"{path_id}-{style}",
                    path_id=path_id,
                    env_id=env_id,
                    start=start,
                    goal=goal,
                    reference_path=path,
                    instruction=generate_instruction(graph, path, style, instr_seed, max_len, vocab),
                    split=split,
                    flavor=flavor,
                )
            )
    return episodes


def build_r2r_like(
    worlds: Sequence[EnvGraph],
    counts: Dict[str, int],
    seed: int,
    params: Optional[DataParams] = None,
) -> DatasetManifest:
    params = params or DataParams()
    if params.min_hops < 1 or params.max_hops < params.min_hops:
        raise GenerationError(f"infeasible hop range {params.min_hops}-{params.max_hops}")
    rng = np.random.default_rng(seed)
    vocab = build_vocab()
    seen, unseen = _split_worlds(worlds, params.unseen_worlds, rng)
    by_id = {g.env_id: g for g in worlds}

    seen_pairs = _sample(
        _pool(seen, params), counts.get("train", 0) + counts.get("val_seen", 0), rng, "seen trajectories"
    )
    order = rng.permutation(len(seen_pairs))
    n_train = counts.get("train", 0)
    train_pairs = sorted(seen_pairs[i] for i in order[:n_train])
    val_seen_pairs = sorted(seen_pairs[i] for i in order[n_train:])
    unseen_pairs = _sample(_pool(unseen, params), counts.get("val_unseen", 0), rng, "unseen trajectories")

    episodes = {}
    for split, pairs in (("train", train_pairs), ("val_seen", val_seen_pairs), ("val_unseen", unseen_pairs)):
        episodes[split] = _trajectory_episodes(by_id, pairs, split, "r2r", "r2r", rng, STYLES, params.max_len, vocab)

    manifest = DatasetManifest(
        worlds={g.env_id: g for g in sorted(worlds, key=lambda g: g.env_id)},
        episodes=episodes,
        vocab=vocab,
        seeds={"data": seed},
        params=params.model_dump(mode="json"),
    )
    logger.info(
        f"Built r2r-like data: {', '.join(f'{k}={len(v)}' for k, v in episodes.items())} episodes "
        f"over {len(seen)} seen / {len(unseen)} unseen worlds"
    )
    return manifest.validate()


def build_r4r_like(r2r_manifest: DatasetManifest, seed: int, max_per_split: Optional[int] = None) -> DatasetManifest:
    rng = np.random.default_rng(seed)
    episodes = {}
    total = 0
    for split in SPLITS:
        trajectories: Dict[str, Dict[str, Episode]] = {}
        for ep in r2r_manifest.split(split, include_augmented=False):
            trajectories.setdefault(ep.path_id, {})[ep.instruction.style] = ep
        by_start: Dict[Tuple[str, int], List[str]] = {}
        for path_id, styled in sorted(trajectories.items()):
            first = next(iter(styled.values()))
            by_start.setdefault((first.env_id, first.start), []).append(path_id)

        pairs = []
        for path_id, styled in sorted(trajectories.items()):
            first = next(iter(styled.values()))
            for other in by_start.get((first.env_id, first.goal), []):
                if other != path_id:
                    pairs.append((path_id, other))
        if not pairs:
            if trajectories:
                logger.warning(f"No joinable r2r trajectories in {split}")
            episodes[split] = []
            continue
        cap = max_per_split if max_per_split is not None else len(trajectories)
        picked = sorted(rng.permutation(len(pairs))[: min(cap, len(pairs))])

        split_episodes = []
        for idx, k in enumerate(picked):
            a, b = pairs[k]
            path_id = f"r4r-{split}-{idx:05d}"
            for style in STYLES:
                if style not in trajectories[a] or style not in trajectories[b]:
                    continue
                e1, e2 = trajectories[a][style], trajectories[b][style]
                split_episodes.append(
                    Episode(
                        episode_id=f"{path_id}-{style}",
                        path_id=path_id,
                        env_id=e1.env_id,
                        start=e1.start,
                        goal=e2.goal,
                        reference_path=e1.reference_path + e2.reference_path[1:],
                        instruction=join_instructions(e1.instruction, e2.instruction),
                        split=split,
                        flavor="r4r",
                    )
                )
        episodes[split] = split_episodes
        total += len(split_episodes)

    if total == 0:
        raise GenerationError("no r2r trajectories can be joined into r4r trajectories")
    logger.info(f"Built r4r-like data: {', '.join(f'{k}={len(v)}' for k, v in episodes.items())} episodes")
    manifest = DatasetManifest(
        worlds=dict(r2r_manifest.worlds),
        episodes=episodes,
        vocab=r2r_manifest.vocab,
        seeds={**r2r_manifest.seeds, "r4r": seed},
        params={**r2r_manifest.params, "r4r_max_per_split": max_per_split},
    )
    return manifest.validate()


def build_augmented(
    worlds: Sequence[EnvGraph],
    count: int,
    seed: int,
    params: Optional[DataParams] = None,
    exclude: Iterable[Tuple[str, int, int]] = (),
) -> List[Episode]:
    """Extra single-instruction r2r-flavour trajectories, flagged `augmented`."""
    params = params or DataParams()
    if count <= 0:
        return []
    rng = np.random.default_rng(seed)
    excluded = set(exclude)
    pool = [pair for pair in _pool(worlds, params) if pair not in excluded]
    pairs = _sample(pool, count, rng, "augmented trajectories")
    return _trajectory_episodes(
        {g.env_id: g for g in worlds}, pairs, "train", "augmented", "aug", rng, STYLES, params.max_len,
        build_vocab(), single_style=True,
    )


def add_augmented(manifest: DatasetManifest, count: int, seed: int) -> DatasetManifest:
    params = DataParams(**manifest.params) if manifest.params else DataParams()
    seen_ids = manifest.env_ids("train")
    worlds = [manifest.worlds[env_id] for env_id in sorted(seen_ids)]
    exclude = {(ep.env_id, ep.start, ep.goal) for ep in manifest.split("val_seen")}
    extra = build_augmented(worlds, count, seed, params, exclude=exclude)
    manifest.episodes["train"] = list(manifest.episodes["train"]) + extra
    manifest.seeds = {**manifest.seeds, "augmented": seed}
    logger.info(f"Added {len(extra)} augmented episodes")
    return manifest


def build_dataset(params: DataParams, seed: int) -> DatasetManifest:
    worlds = generate_worlds(params.n_worlds, seed, params.world)
    counts = {
        "train": params.train_trajectories,
        "val_seen": params.val_seen_trajectories,
        "val_unseen": params.val_unseen_trajectories,
    }
    manifest = build_r2r_like(worlds, counts, seed, params)
    if params.augmented:
        manifest = add_augmented(manifest, params.augmented, seed + 1)
    return manifest


def save(manifest: DatasetManifest, path: PathLike) -> Path:
    root = Path(path)
    (root / "worlds").mkdir(parents=True, exist_ok=True)
    world_files = [save_world(g, root / "worlds").name for g in manifest.worlds.values()]
    splits = {}
    for split, episodes in manifest.episodes.items():
        name = f"{split}.episodes.jsonl"
        write_jsonl(root / name, (ep.model_dump(mode="json") for ep in episodes))
        splits[split] = {"file": name, "count": len(episodes)}
    write_json(
        root / "manifest.json",
        {
            "schema": manifest.schema,
            "vocab": manifest.vocab.to_dict(),
            "worlds": sorted(world_files),
            "splits": splits,
            "seeds": manifest.seeds,
            "params": manifest.params,
        },
    )
    logger.info(f"Saved dataset to {root}")
    return root


def load(path: PathLike) -> DatasetManifest:
    root = Path(path)
    if root.is_file():
        root = root.parent
    meta = read_json(root / "manifest.json", schema=DATA_SCHEMA)
    vocab = Vocab.from_dict(meta["vocab"])
    worlds = {}
    for name in meta["worlds"]:
        if not name.endswith(WORLD_SUFFIX):
            raise DataError(f"unexpected world file {name}")
        graph = load_world(root / "worlds" / name)
        worlds[graph.env_id] = graph
    episodes = {}
    for split, info in meta["splits"].items():
        episodes[split] = read_jsonl(root / info["file"], Episode.model_validate)
        if len(episodes[split]) != info["count"]:
            raise DataError(f"{info['file']}: expected {info['count']} episodes, found {len(episodes[split])}")
    manifest = DatasetManifest(
        worlds=worlds,
        episodes=episodes,
        vocab=vocab,
        seeds=meta.get("seeds", {}),
        params=meta.get("params", {}),
        schema=meta["schema"],
    )
    return manifest.validate()
