from typing import Callable, List, Mapping, Optional, Sequence

from joblib import Parallel, delayed

from navgen import logger
from navgen.backends.base import BaseBackend
from navgen.dataset import Episode
from navgen.policies import Selector, Trajectory, backtracking_rollout, rollout
from navgen.world import EnvGraph


def _run_episode(selector, graph, episode, max_steps, backtrack, resume_score) -> Trajectory:
    if backtrack:
        return backtracking_rollout(selector, graph, episode, max_steps, resume_score=resume_score)
    return rollout(selector, graph, episode, max_steps)


class LocalRunner(BaseBackend):
    """Maps work over episodes with joblib; results keep the input order."""

    def map(self, func: Callable, items: Sequence) -> List:
        if self.jobs == 1 or self.joblib_backend == "sequential" or len(items) <= 1:
            return [func(item) for item in items]
        return list(Parallel(n_jobs=self.jobs, backend=self.joblib_backend)(delayed(func)(item) for item in items))

    def rollouts(
        self,
        selector: Selector,
        worlds: Mapping[str, EnvGraph],
        episodes: Sequence[Episode],
        max_steps: Optional[Mapping[str, int]] = None,
        backtrack: bool = False,
        resume_score: str = "logprob",
    ) -> List[Trajectory]:
        """Roll ``selector`` on every episode; ``max_steps`` maps flavour to step budget."""
        logger.info(f"Rolling out {selector.name} on {len(episodes)} episodes with {self.jobs} job(s)")
        budgets = max_steps or {}
        tasks = [
            (ep, budgets.get("r4r" if ep.flavor == "r4r" else "r2r", ep.max_steps())) for ep in episodes
        ]

        def run(task):
            episode, budget = task
            return _run_episode(selector, worlds[episode.env_id], episode, budget, backtrack, resume_score)

        return self.map(run, tasks)
