"""
Full-size training runs on the default desk dataset (enabled with --runslow)
"""

import time

import numpy as np
import pytest

from navgen import logger
from navgen.backends.local import LocalRunner
from navgen.dataset import DataParams, build_dataset
from navgen.metrics import score_trajectories
from navgen.models import build_model, load_model
from navgen.policies import CombinedSelector, DiscriminativeSelector, GenerativeSelector, by_episode
from navgen.trainers.navigation import utils
from navgen.trainers.navigation.__main__ import fit, model_config_for
from navgen.trainers.navigation.params import TrainConfig


WALL_BUDGET_SECONDS = 30 * 60


@pytest.fixture(scope="module")
def desk_manifest():
    return build_dataset(DataParams(), seed=7)


def _train(config, manifest):
    started = time.perf_counter()
    result = fit(config, manifest, build_model(model_config_for(config, manifest)))
    elapsed = time.perf_counter() - started
    logger.info(f"{config.model} seed {config.seed}: {len(result.log)} epochs in {elapsed / 60:.1f} min")
    return result, elapsed


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["disc", "gen"])
def test_default_training_run(tmp_path, desk_manifest, kind):
    config = TrainConfig(model=kind, output_dir=str(tmp_path / kind))
    result, elapsed = _train(config, desk_manifest)
    assert elapsed < WALL_BUDGET_SECONDS

    log = result.log
    assert log[-1]["loss"] < 0.5 * log[0]["loss"]
    best_sr = log[result.best_epoch - 1]["val_seen"]["SR"]
    assert best_sr == max(record["val_seen"]["SR"] for record in log)
    assert best_sr > 0.5
    assert best_sr >= 0.8

    model, _ = load_model(tmp_path / kind / utils.BEST_CHECKPOINT, vocab_hash=desk_manifest.vocab.hash)
    reloaded = utils.evaluate(model, desk_manifest, config, splits=("val_seen",))
    assert reloaded["val_seen"].aggregate()["SR"] == pytest.approx(best_sr)


def _unseen_sr(selector, manifest, config):
    episodes = manifest.split("val_unseen")
    budgets = {"r2r": config.r2r_max_steps, "r4r": config.r4r_max_steps}
    trajectories = LocalRunner(jobs=config.jobs).rollouts(selector, manifest.worlds, episodes, budgets)
    report = score_trajectories(manifest.worlds, episodes, by_episode(trajectories), config.success_distance)
    return report.aggregate()["SR"]


@pytest.mark.slow
def test_generative_policy_generalizes_across_seeds(tmp_path, desk_manifest):
    rows = []
    for seed in range(5):
        models = {}
        for kind in ("disc", "gen"):
            config = TrainConfig(model=kind, seed=seed, output_dir=str(tmp_path / f"{kind}-{seed}"))
            models[kind] = _train(config, desk_manifest)[0].model
        rows.append(
            {
                "disc": _unseen_sr(DiscriminativeSelector(models["disc"]), desk_manifest, config),
                "gen": _unseen_sr(GenerativeSelector(models["gen"]), desk_manifest, config),
                "combined": _unseen_sr(CombinedSelector(models["gen"], models["disc"], 0.5), desk_manifest, config),
            }
        )
        logger.info(f"seed {seed}: val_unseen SR {rows[-1]}")
    mean = {name: float(np.mean([row[name] for row in rows])) for name in ("disc", "gen", "combined")}
    assert mean["gen"] >= mean["disc"] - 0.02
    assert mean["combined"] >= max(mean["gen"], mean["disc"]) - 0.02
