"""Latent sampling and the evidence-lower-bound training loss."""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F


@dataclass
class LatentParams:
    """Diagonal Gaussian over ``z``; the variance head predicts ``log_var``."""

    mu: torch.Tensor
    log_var: torch.Tensor

    @property
    def sigma(self) -> torch.Tensor:
        return torch.exp(0.5 * self.log_var)


@dataclass
class LossTerms:
    mse: torch.Tensor
    kl: torch.Tensor
    total: torch.Tensor


def reparameterize(
    lp: LatentParams,
    epsilon: torch.Tensor | None = None,
    generator: torch.Generator | None = None,
) -> torch.Tensor:
    """``z = mu + exp(log_var / 2) * epsilon`` with ``epsilon ~ N(0, I)`` unless given."""
    if epsilon is None:
        epsilon = torch.randn(
            lp.mu.shape, generator=generator, dtype=lp.mu.dtype, device=lp.mu.device
        )
    return lp.mu + lp.sigma * epsilon


def kl_divergence(lp: LatentParams) -> torch.Tensor:
    """Closed-form ``KL(N(mu, sigma^2) || N(0, I))`` summed over the last dimension."""
    return 0.5 * torch.sum(lp.mu.pow(2) + lp.log_var.exp() - 1.0 - lp.log_var, dim=-1)


def elbo_terms(
    pred_offsets: torch.Tensor,
    true_fut_offsets: torch.Tensor,
    lp: LatentParams,
    kl_weight: float,
) -> LossTerms:
    if pred_offsets.shape != true_fut_offsets.shape:
        raise ValueError(f"Prediction shape {tuple(pred_offsets.shape)} != target shape {tuple(true_fut_offsets.shape)}")
    mse = F.mse_loss(pred_offsets, true_fut_offsets)
    kl = kl_divergence(lp).mean()
    return LossTerms(mse=mse, kl=kl, total=mse + kl_weight * kl)


def elbo_loss(
    pred_offsets: torch.Tensor,
    true_fut_offsets: torch.Tensor,
    lp: LatentParams,
    kl_weight: float,
) -> torch.Tensor:
    """Mean squared offset error plus ``kl_weight`` times the (batch-mean) KL term."""
    return elbo_terms(pred_offsets, true_fut_offsets, lp, kl_weight).total
