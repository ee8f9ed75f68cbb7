from __future__ import annotations

from typing import Literal, Tuple

from pydantic import BaseModel, Field, model_validator


class ModelConfig(BaseModel):
    """Network, optimisation and sampling settings.

    ``occupancy_cells`` and ``scene_channels`` size the optional branches; ``0``
    turns a branch off. They are set from the context variant, not by hand.
    """

    obs_len: int = Field(default=8, ge=2)
    pred_len: int = Field(default=8, ge=1)
    conv1d_kernel: int = Field(default=8, ge=1)
    conv1d_channels: int = Field(default=64, ge=1)
    cnn_kernel_sizes: Tuple[int, int, int] = (8, 4, 4)
    cnn_channels: Tuple[int, int, int] = (32, 64, 128)
    lstm_hidden: int = Field(default=128, ge=1)
    latent_dim: int = Field(default=16, ge=1)
    fusion_dim: int = Field(default=128, ge=1)

    kl_weight: float = Field(default=1.0, ge=0)
    kl_warmup_fraction: float = Field(default=0.1, ge=0, le=1)
    learning_rate: float = Field(default=1e-3, gt=0)
    lr_schedule: Literal["constant", "cosine"] = "constant"
    lr_min: float = Field(default=0.0, ge=0)
    grad_clip: float = Field(default=0.0, ge=0)
    batch_size: int = Field(default=64, ge=1)
    epochs: int = Field(default=50, ge=1)
    num_samples: int = Field(default=10, ge=1)
    seed: int = 0

    occupancy_cells: int = Field(default=0, ge=0)
    scene_channels: int = Field(default=0, ge=0)
    scene_input_size: int = Field(default=64, ge=8)
    standardize_offsets: bool = True

    @model_validator(mode="after")
    def _check_cnn(self):
        if min(self.cnn_kernel_sizes) < 1 or min(self.cnn_channels) < 1:
            raise ValueError("CNN kernel sizes and channel widths must be positive")
        return self
