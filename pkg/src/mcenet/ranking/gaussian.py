from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SIGMA_FLOOR = 1e-6
RHO_LIMIT = 0.999


@dataclass(frozen=True)
class BivariateGaussian:
    """``N(mu_xy, sigma_xy^2, rho)`` over world positions in meters."""

    mu_xy: np.ndarray
    sigma_xy: np.ndarray
    rho: float

    def __post_init__(self):
        if np.any(np.asarray(self.sigma_xy) < SIGMA_FLOOR):
            raise ValueError(f"sigma_xy {self.sigma_xy} is below the floor {SIGMA_FLOOR}")
        if abs(self.rho) > RHO_LIMIT:
            raise ValueError(f"|rho| = {abs(self.rho)} exceeds {RHO_LIMIT}")


def fit_bivariate_gaussian(points: np.ndarray) -> BivariateGaussian:
    """Maximum-likelihood fit (denominator ``N``) of an ``N x 2`` point cloud.

    Sigmas are floored at ``SIGMA_FLOOR``; rho is clamped to ``RHO_LIMIT`` and is 0
    when either axis has no spread.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValueError(f"Points must be N x 2, got shape {points.shape}")
    if points.shape[0] < 2:
        raise ValueError(f"Need at least 2 points to fit a Gaussian, got {points.shape[0]}")

    mu = points.mean(axis=0)
    centred = points - mu
    raw_sigma = np.sqrt((centred**2).mean(axis=0))

    if np.any(raw_sigma < SIGMA_FLOOR):
        rho = 0.0
    else:
        rho = float((centred[:, 0] * centred[:, 1]).mean() / (raw_sigma[0] * raw_sigma[1]))
        rho = float(np.clip(rho, -RHO_LIMIT, RHO_LIMIT))

    return BivariateGaussian(mu_xy=mu, sigma_xy=np.maximum(raw_sigma, SIGMA_FLOOR), rho=rho)


def bivariate_log_pdf(points: np.ndarray, gaussian: BivariateGaussian) -> np.ndarray:
    """Closed-form log density of each row of ``points`` (``... x 2``)."""
    points = np.asarray(points, dtype=np.float64)
    sx, sy = gaussian.sigma_xy
    rho = gaussian.rho
    zx = (points[..., 0] - gaussian.mu_xy[0]) / sx
    zy = (points[..., 1] - gaussian.mu_xy[1]) / sy
    one_minus = 1.0 - rho**2
    quad = (zx**2 - 2.0 * rho * zx * zy + zy**2) / one_minus
    return -np.log(2.0 * np.pi * sx * sy * np.sqrt(one_minus)) - 0.5 * quad
