from navgen.policies.io import TRAJ_SUFFIX, by_episode, load_trajectories, save_trajectories
from navgen.policies.posterior import (
    ActionPosterior,
    combine_scores,
    combined_select,
    disc_action_dist,
    first_argmax,
    gen_action_posterior,
    gen_select,
    log_normalize,
)
from navgen.policies.rollout import TRAJ_SCHEMA, Snapshot, Trajectory, backtracking_rollout, rollout
from navgen.policies.selectors import (
    SELECTORS,
    CombinedSelector,
    Decision,
    DiscriminativeSelector,
    GenerativeSelector,
    OracleSelector,
    RandomSelector,
    Selector,
    SelectorSession,
)
