from pathlib import Path
from typing import Dict, Iterable, List

from navgen.errors import DataError
from navgen.policies.rollout import TRAJ_SCHEMA, Trajectory
from navgen.utils import PathLike, read_jsonl, write_jsonl


TRAJ_SUFFIX = ".traj.jsonl"


def save_trajectories(path: PathLike, trajectories: Iterable[Trajectory], config_hash: str = "") -> Path:
    path = Path(path)
    write_jsonl(path, (t.to_record(config_hash) for t in trajectories))
    return path


def load_trajectories(path: PathLike) -> List[Trajectory]:
    return read_jsonl(path, Trajectory.from_record, schema=TRAJ_SCHEMA)


def by_episode(trajectories: Iterable[Trajectory]) -> Dict[str, Trajectory]:
    index: Dict[str, Trajectory] = {}
    for traj in trajectories:
        if traj.episode_id in index:
            raise DataError(f"duplicate trajectory for episode {traj.episode_id}")
        index[traj.episode_id] = traj
    return index
