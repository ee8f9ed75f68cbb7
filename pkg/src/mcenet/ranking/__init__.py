"""Likelihood ranking of sampled trajectories with per-step bivariate Gaussians."""

from .gaussian import RHO_LIMIT, SIGMA_FLOOR, BivariateGaussian, bivariate_log_pdf, fit_bivariate_gaussian
from .ranker import RankedPredictions, rank_predictions, score_trajectories

__all__ = [
    "RHO_LIMIT",
    "SIGMA_FLOOR",
    "BivariateGaussian",
    "bivariate_log_pdf",
    "fit_bivariate_gaussian",
    "RankedPredictions",
    "rank_predictions",
    "score_trajectories",
]
