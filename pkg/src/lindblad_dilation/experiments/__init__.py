"""Experiment drivers and CLI."""

from .config import ExperimentConfig, InitialStateSpec, ModelSpec, config_from_dict, load_config
from .runners import (
    MODEL_BUILDERS,
    build_model,
    fit_slope,
    initial_density,
    observable_function,
    run_convergence,
    run_observable,
    verify,
)

__all__ = [
    "ExperimentConfig",
    "InitialStateSpec",
    "ModelSpec",
    "config_from_dict",
    "load_config",
    "MODEL_BUILDERS",
    "build_model",
    "fit_slope",
    "initial_density",
    "observable_function",
    "run_convergence",
    "run_observable",
    "verify",
]
