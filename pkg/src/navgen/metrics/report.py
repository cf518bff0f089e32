from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional

import pandas as pd

from navgen import logger
from navgen.dataset import Episode
from navgen.errors import DataError
from navgen.metrics.scores import METRIC_COLUMNS, SUCCESS_DISTANCE, episode_scores
from navgen.policies import Trajectory
from navgen.utils import PathLike, write_json
from navgen.world import EnvGraph


METRICS_SCHEMA = "navgen-metrics/1"


@dataclass
class MetricsReport:
    """Per-episode metric rows; aggregates are plain means over episodes."""

    episodes: pd.DataFrame
    d_th: float = SUCCESS_DISTANCE
    meta: dict = field(default_factory=dict)

    def aggregate(self) -> dict:
        if self.episodes.empty:
            return {name: float("nan") for name in METRIC_COLUMNS}
        means = self.episodes[list(METRIC_COLUMNS)].mean(axis=0)
        return {name: float(means[name]) for name in METRIC_COLUMNS}

    def summary(self) -> dict:
        return {
            "schema": METRICS_SCHEMA,
            "episodes": int(len(self.episodes)),
            "d_th": self.d_th,
            "metrics": self.aggregate(),
            **self.meta,
        }

    def save(self, output_dir: PathLike, stem: str = "metrics") -> Path:
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        self.episodes.to_csv(output_dir / f"{stem}.csv", index=False, float_format="%.6f")
        write_json(output_dir / f"{stem}.json", self.summary())
        logger.info(f"Metrics written to {output_dir / stem}.{{csv,json}}")
        return output_dir / f"{stem}.json"


def score_trajectories(
    worlds: Mapping[str, EnvGraph],
    episodes: Iterable[Episode],
    trajectories: Mapping[str, Trajectory],
    d_th: float = SUCCESS_DISTANCE,
    meta: Optional[dict] = None,
) -> MetricsReport:
    rows = []
    for ep in episodes:
        traj = trajectories.get(ep.episode_id)
        if traj is None:
            raise DataError(f"no trajectory for episode {ep.episode_id}")
        graph = worlds[ep.env_id]
        traj.validate(graph)
        if traj.nodes[0] != ep.start:
            raise DataError(f"trajectory {ep.episode_id} does not begin at the episode start")
        row = {"episode_id": ep.episode_id, "split": ep.split, "flavor": ep.flavor}
        row.update(episode_scores(graph, traj.nodes, ep.reference_path, ep.goal, d_th))
        rows.append(row)
    frame = pd.DataFrame(rows, columns=["episode_id", "split", "flavor", *METRIC_COLUMNS])
    return MetricsReport(episodes=frame, d_th=d_th, meta=dict(meta or {}))
