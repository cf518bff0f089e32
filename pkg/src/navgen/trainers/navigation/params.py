from typing import Literal, Optional

from pydantic import Field, field_validator

from navgen.trainers.common import NavGenParams


class TrainConfig(NavGenParams):
    data_path: str = Field("data/r2r", title="Dataset directory written by gen-data")
    output_dir: Optional[str] = Field(None, title="Where checkpoints and logs go (defaults to runs/<project_name>)")
    model: Literal["disc", "gen"] = Field("gen", title="disc = follower, gen = speaker policy")
    hidden: int = Field(64, title="History / decoder hidden size")
    token_dim: int = Field(32, title="Token embedding size")
    lr: float = Field(1e-3, title="Learning rate for the optimizer")
    optimizer: Literal["adam", "sgd"] = Field("adam", title="Optimizer type")
    epochs: int = Field(10, title="Number of epochs on the original training data")
    augmented_epochs: int = Field(0, title="Epochs on augmented + original data before the original-only phase")
    batch_size: int = Field(16, title="Episodes per parameter update")
    eta: float = Field(1.0 / 3.0, title="Probability of executing the student's action at a step")
    supervision: Literal["supervised", "fidelity"] = Field(
        "fidelity", title="r4r regime: teacher forcing along the reference, or the fidelity teacher"
    )
    max_grad_norm: float = Field(40.0, title="Maximum gradient norm for clipping (0 disables)")
    max_train_episodes: Optional[int] = Field(
        1000, title="Seeded subset of training episodes per epoch (None uses all)"
    )
    max_val_episodes: Optional[int] = Field(100, title="Cap on validation episodes per split (None uses all)")
    r2r_max_steps: int = Field(20, title="Step budget for r2r-flavour episodes")
    r4r_max_steps: int = Field(40, title="Step budget for r4r-flavour episodes")
    success_distance: float = Field(3.0, title="Success threshold d_th")
    jobs: int = Field(1, title="Parallel validation rollouts")

    @field_validator("eta")
    @classmethod
    def _eta_range(cls, v):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {v}")
        return v

    @field_validator("epochs", "augmented_epochs")
    @classmethod
    def _non_negative(cls, v):
        if v < 0:
            raise ValueError("epoch counts cannot be negative")
        return v

    @field_validator("batch_size", "hidden", "token_dim", "r2r_max_steps", "r4r_max_steps", "jobs")
    @classmethod
    def _positive(cls, v):
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @property
    def run_dir(self) -> str:
        return self.output_dir or f"runs/{self.project_name}"
