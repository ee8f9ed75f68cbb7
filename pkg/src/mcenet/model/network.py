"""The multi-context encoder network: X/Y encoders, latent head and decoder."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Literal, Tuple

import torch
import torch.nn as nn

from .config import ModelConfig
from .data import Batch
from .losses import LatentParams, reparameterize

NUM_AGENT_TYPES = 3


@dataclass
class EncodedContext:
    """``(B, fusion_dim)`` output of an encoder."""

    phi: torch.Tensor


class SceneCNN(nn.Module):
    """Three stride-2 convolutions with ReLU, then a spatial average.

    Maps ``(B, S, H, W, C)`` scene tensors to ``(B, S, channels[-1])`` features.
    """

    def __init__(self, in_channels: int, kernel_sizes: Tuple[int, ...], channels: Tuple[int, ...]):
        super().__init__()
        layers: List[nn.Module] = []
        prev = in_channels
        for k, c in zip(kernel_sizes, channels):
            layers.extend([nn.Conv2d(prev, c, kernel_size=k, stride=2, padding=(k - 1) // 2), nn.ReLU()])
            prev = c
        self.body = nn.Sequential(*layers)
        self.out_dim = prev

    def forward(self, scene: torch.Tensor) -> torch.Tensor:
        b, s = scene.shape[:2]
        x = scene.reshape(b * s, *scene.shape[2:]).permute(0, 3, 1, 2)
        features = self.body(x).mean(dim=(2, 3))
        return features.reshape(b, s, -1)


class ContextEncoder(nn.Module):
    """Motion, occupancy and scene branches, each read by its own LSTM.

    The motion branch is a same-length 1-D convolution over per-step offsets
    concatenated with the agent-type one-hot. The branches' final hidden states are
    concatenated and fused by a fully connected layer with ReLU.
    """

    def __init__(self, config: ModelConfig, horizon: Literal["obs", "fut"]):
        super().__init__()
        self.config = config
        self.horizon = horizon
        hidden = config.lstm_hidden

        self.motion_conv = nn.Conv1d(
            2 + NUM_AGENT_TYPES, config.conv1d_channels, kernel_size=config.conv1d_kernel, padding="same"
        )
        self.motion_lstm = nn.LSTM(config.conv1d_channels, hidden, batch_first=True)
        branches = 1

        self.occupancy_lstm: nn.LSTM | None = None
        if config.occupancy_cells:
            self.occupancy_lstm = nn.LSTM(config.occupancy_cells, hidden, batch_first=True)
            branches += 1

        self.scene_cnn: SceneCNN | None = None
        self.scene_lstm: nn.LSTM | None = None
        if config.scene_channels:
            self.scene_cnn = SceneCNN(config.scene_channels, config.cnn_kernel_sizes, config.cnn_channels)
            self.scene_lstm = nn.LSTM(self.scene_cnn.out_dim, hidden, batch_first=True)
            branches += 1

        self.fusion = nn.Sequential(nn.Linear(branches * hidden, config.fusion_dim), nn.ReLU())

    @staticmethod
    def _last_hidden(lstm: nn.LSTM, sequence: torch.Tensor) -> torch.Tensor:
        _, (h, _) = lstm(sequence)
        return h[-1]

    def forward(self, batch: Batch) -> EncodedContext:
        motion = batch[f"{self.horizon}_motion"]
        onehot = batch["type_onehot"]
        if motion.ndim != 3 or motion.shape[-1] != 2:
            raise ValueError(f"{self.horizon}_motion must be (B, L, 2), got {tuple(motion.shape)}")
        if onehot.shape != (motion.shape[0], NUM_AGENT_TYPES):
            raise ValueError(f"type_onehot must be (B, {NUM_AGENT_TYPES}), got {tuple(onehot.shape)}")

        steps = motion.shape[1]
        x = torch.cat([motion, onehot.unsqueeze(1).expand(-1, steps, -1)], dim=-1)
        x = torch.relu(self.motion_conv(x.transpose(1, 2))).transpose(1, 2)
        features = [self._last_hidden(self.motion_lstm, x)]

        if self.occupancy_lstm is not None:
            occupancy = batch.get(f"{self.horizon}_occupancy")
            if occupancy is None or occupancy.shape[-1] != self.config.occupancy_cells:
                raise ValueError(
                    f"{self.horizon}_occupancy must be (B, S, {self.config.occupancy_cells})"
                )
            features.append(self._last_hidden(self.occupancy_lstm, occupancy))

        if self.scene_cnn is not None and self.scene_lstm is not None:
            scene = batch.get(f"{self.horizon}_scene")
            if scene is None or scene.ndim != 5 or scene.shape[-1] != self.config.scene_channels:
                raise ValueError(f"{self.horizon}_scene must be (B, S, H, W, {self.config.scene_channels})")
            scene_features = self.scene_cnn(scene)
            if scene_features.shape[1] == 1:
                # static raster: one feature vector shared by every step
                scene_features = scene_features.expand(-1, steps, -1)
            features.append(self._last_hidden(self.scene_lstm, scene_features))

        return EncodedContext(self.fusion(torch.cat(features, dim=-1)))


class LatentHead(nn.Module):
    """Two FC+ReLU layers over ``[phi_x, phi_y]``, then mean and log-variance heads."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        f = config.fusion_dim
        self.hidden = nn.Sequential(nn.Linear(2 * f, f), nn.ReLU(), nn.Linear(f, f), nn.ReLU())
        self.mu = nn.Linear(f, config.latent_dim)
        self.log_var = nn.Linear(f, config.latent_dim)

    def forward(self, phi_x: EncodedContext, phi_y: EncodedContext) -> LatentParams:
        h = self.hidden(torch.cat([phi_x.phi, phi_y.phi], dim=-1))
        return LatentParams(mu=self.mu(h), log_var=self.log_var(h))


class TrajectoryDecoder(nn.Module):
    """FC fusion of ``[phi_x, z]`` repeated per step into an LSTM with a 2-D offset head."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.pred_len = config.pred_len
        self.fuse = nn.Sequential(nn.Linear(config.fusion_dim + config.latent_dim, config.fusion_dim), nn.ReLU())
        self.lstm = nn.LSTM(config.fusion_dim, config.lstm_hidden, batch_first=True)
        self.head = nn.Linear(config.lstm_hidden, 2)

    def forward(self, phi_x: EncodedContext, z: torch.Tensor) -> torch.Tensor:
        fused = self.fuse(torch.cat([phi_x.phi, z], dim=-1))
        out, _ = self.lstm(fused.unsqueeze(1).expand(-1, self.pred_len, -1))
        return self.head(out)


class MCENet(nn.Module):
    """Conditional variational trajectory model.

    Training encodes past (X) and future (Y) contexts, samples ``z`` from the
    posterior head and decodes offsets. Inference uses the X-encoder only and draws
    ``z`` from the standard-normal prior.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.x_encoder = ContextEncoder(config, "obs")
        self.y_encoder = ContextEncoder(config, "fut")
        self.latent_head = LatentHead(config)
        self.decoder = TrajectoryDecoder(config)

    def encode_past(self, batch: Batch) -> EncodedContext:
        return self.x_encoder(batch)

    def encode_future(self, batch: Batch) -> EncodedContext:
        return self.y_encoder(batch)

    def latent_params(self, phi_x: EncodedContext, phi_y: EncodedContext) -> LatentParams:
        return self.latent_head(phi_x, phi_y)

    def decode(self, phi_x: EncodedContext, z: torch.Tensor) -> torch.Tensor:
        return self.decoder(phi_x, z)

    def forward(
        self,
        batch: Batch,
        epsilon: torch.Tensor | None = None,
        generator: torch.Generator | None = None,
    ) -> Tuple[torch.Tensor, LatentParams]:
        phi_x = self.encode_past(batch)
        lp = self.latent_params(phi_x, self.encode_future(batch))
        z = reparameterize(lp, epsilon=epsilon, generator=generator)
        return self.decode(phi_x, z), lp


def build_model(config: ModelConfig) -> MCENet:
    """Seeded initialisation."""
    torch.manual_seed(config.seed)
    return MCENet(config)
