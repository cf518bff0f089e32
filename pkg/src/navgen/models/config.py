from typing import Literal

from pydantic import BaseModel, Field


class ModelConfig(BaseModel):
    kind: Literal["disc", "gen"] = Field("gen", title="disc = follower, gen = speaker policy")
    hidden: int = Field(64, title="History / decoder hidden size H")
    token_dim: int = Field(32, title="Token embedding size")
    feature_dim: int = Field(32, title="Visual feature size D_v")
    vocab_size: int = Field(0, title="Vocabulary size")
    seed: int = Field(0, title="Initialisation seed")

    @property
    def action_dim(self) -> int:
        return 4 + self.feature_dim
