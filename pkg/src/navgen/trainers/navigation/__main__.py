import argparse
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from navgen import logger
from navgen.dataset import DatasetManifest, load
from navgen.errors import ConfigError, DataError
from navgen.models import ModelConfig, PolicyModel, build_model
from navgen.ndgrad import Tape, add, make_optimizer, save_checkpoint
from navgen.ndgrad.optim import clip_grad_norm
from navgen.trainers.common import apply_seed_override, load_config_file, monitor
from navgen.trainers.navigation import utils
from navgen.trainers.navigation.params import TrainConfig
from navgen.utils import write_jsonl


def parse_args():
    parser = argparse.ArgumentParser()
    parser.add_argument("--training_config", type=str, required=True)
    return parser.parse_args()


@dataclass
class TrainResult:
    model: PolicyModel
    log: List[dict] = field(default_factory=list)
    checkpoint: Optional[Path] = None
    best_epoch: Optional[int] = None


def model_config_for(config: TrainConfig, manifest: DatasetManifest) -> ModelConfig:
    feature_dim = next(iter(manifest.worlds.values())).feature_dim
    return ModelConfig(
        kind=config.model,
        hidden=config.hidden,
        token_dim=config.token_dim,
        feature_dim=feature_dim,
        vocab_size=len(manifest.vocab),
        seed=config.seed,
    )


def _run_epoch(model, episodes, config: TrainConfig, manifest: DatasetManifest, optimizer, epoch: int) -> dict:
    order = np.random.default_rng([config.seed, epoch]).permutation(len(episodes))
    params = model.parameters()
    loss_sum, step_count, grad_norms = 0.0, 0, []
    for start in range(0, len(order), config.batch_size):
        batch = [episodes[k] for k in order[start : start + config.batch_size]]
        optimizer.zero_grad()
        with Tape() as tape:
            total, steps = None, 0
            for ep in batch:
                rng = utils.episode_rng(config.seed, epoch, ep)
                loss, n = utils.episode_loss(model, manifest.graph(ep), ep, config, rng)
                total = loss if total is None else add(total, loss)
                steps += n
            batch_loss = total * (1.0 / steps)
            tape.backward(batch_loss)
        grad_norms.append(clip_grad_norm(params, config.max_grad_norm))
        optimizer.step()
        loss_sum += float(total.data)
        step_count += steps
    return {"loss": loss_sum / max(step_count, 1), "steps": step_count, "grad_norm": float(np.mean(grad_norms))}


def fit(
    config: TrainConfig, manifest: DatasetManifest, model: PolicyModel, output_dir: Optional[str] = None
) -> TrainResult:
    """Train ``model`` in place: optional augmented phase first, then the original training data alone.

    Each epoch appends one record (losses and validation metrics) to the log; the run ends with a
    checkpoint that depends only on the config, the data and the seed.
    """
    if model.kind != config.model:
        raise ConfigError(f"config trains a {config.model!r} model but got a {model.kind!r} model")
    phases = [("augmented", True, config.augmented_epochs), ("original", False, config.epochs)]
    optimizer = make_optimizer(config.optimizer, model.parameters(), config.lr)
    result = TrainResult(model=model)
    best_sr = -1.0
    output_dir = Path(output_dir or config.run_dir)
    config_hash = config.config_hash()
    model_doc = model.config.model_dump()

    epoch = 0
    for phase, include_augmented, n_epochs in phases:
        if n_epochs == 0:
            continue
        episodes = utils.training_episodes(manifest, include_augmented, config.max_train_episodes, config.seed)
        if not episodes:
            raise DataError("the training split is empty")
        for _ in range(n_epochs):
            epoch += 1
            record = {"epoch": epoch, "phase": phase, "episodes": len(episodes)}
            record.update(_run_epoch(model, episodes, config, manifest, optimizer, epoch))
            for split, report in utils.evaluate(model, manifest, config).items():
                record[split] = report.aggregate()
            sr = record.get("val_seen", {}).get("SR")
            if sr is not None and sr > best_sr:
                best_sr, result.best_epoch = sr, epoch
                save_checkpoint(output_dir / utils.BEST_CHECKPOINT, model, model_doc, manifest.vocab.hash, config_hash)
            record["best_epoch"] = result.best_epoch
            result.log.append(record)
            logger.info(f"epoch {epoch} ({phase}): loss={record['loss']:.4f} val_seen SR={sr}")

    result.checkpoint = save_checkpoint(
        output_dir / utils.CHECKPOINT, model, model_doc, manifest.vocab.hash, config_hash
    )
    write_jsonl(output_dir / utils.TRAIN_LOG, result.log)
    logger.info(f"Checkpoint written to {result.checkpoint}")
    return result


@monitor
def train(config):
    if isinstance(config, dict):
        config = TrainConfig(**config)
    config = apply_seed_override(config)
    manifest = load(config.data_path)
    model = build_model(model_config_for(config, manifest))
    logger.info(f"Training {config.model} policy with {model.num_parameters()} parameters")
    config.save(config.run_dir)
    return fit(config, manifest, model)


if __name__ == "__main__":
    args = parse_args()
    training_config = json.load(open(args.training_config))
    if training_config.get("schema") is not None:
        training_config = load_config_file(args.training_config)
    train(TrainConfig(**training_config))
