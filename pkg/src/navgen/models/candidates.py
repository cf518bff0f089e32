from typing import Sequence

import numpy as np

from navgen.ndgrad import Tensor, concat, reshape
from navgen.world import STOP_ORIENTATION, Action, EnvGraph, action_embedding


def candidate_matrix(graph: EnvGraph, node: int, actions: Sequence[Action], stop_feature: Tensor) -> Tensor:
    """Stack the action embeddings of ``actions`` at ``node``; Stop uses the model's learned feature."""
    rows = []
    block = []
    for action in actions:
        if action.is_stop:
            if block:
                rows.append(Tensor(np.stack(block)))
                block = []
            stop_row = concat([Tensor(STOP_ORIENTATION), stop_feature], axis=0)
            rows.append(reshape(stop_row, (1, -1)))
        else:
            block.append(action_embedding(graph, node, action).vector)
    if block:
        rows.append(Tensor(np.stack(block)))
    return rows[0] if len(rows) == 1 else concat(rows, axis=0)
