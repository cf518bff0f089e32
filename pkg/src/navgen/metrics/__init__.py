from navgen.metrics.analysis import MODES, agreement_curve, precision_curve, stop_f1_curve, visit_states
from navgen.metrics.report import METRICS_SCHEMA, MetricsReport, score_trajectories
from navgen.metrics.scores import (
    METRIC_COLUMNS,
    SUCCESS_DISTANCE,
    cls,
    dtw,
    episode_scores,
    nav_error,
    ndtw,
    path_coverage,
    sdtw,
    spl,
    success,
)
from navgen.world import path_length
