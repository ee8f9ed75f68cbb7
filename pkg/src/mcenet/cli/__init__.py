"""Command-line interface, experiment configuration and plots."""

from .config import ConfigError, ExperimentConfig, apply_overrides, load_config, write_resolved_config
from .main import build_parser, main, run_cli
from .plots import draw_window, emit_plots, plot_filename

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "apply_overrides",
    "load_config",
    "write_resolved_config",
    "build_parser",
    "main",
    "run_cli",
    "draw_window",
    "emit_plots",
    "plot_filename",
]
