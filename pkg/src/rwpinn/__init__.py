"""Residual-weighted physics-informed neural networks for reaction-diffusion PDEs."""

from .losses import LossBreakdown, Objective, assemble_loss
from .metrics import (
    BoundDiagnostics,
    ErrorReport,
    bound_diagnostics,
    generalization_error,
)
from .network import NetworkConfig, NetworkParams, init_params, parameter_count
from .optimize import OptimizerConfig, OptimizeResult, lbfgs_minimize
from .problems import REGISTRY, ProblemSpec, efk_energy, get_problem
from .sampling import DomainSpec, SamplerConfig, TrainingSet, build_training_set
from .training import TrainingReport, ensemble_train
from .weighting import METHODS, WeightScheme, weight

__version__ = "0.1.0"

__all__ = [
    "BoundDiagnostics",
    "DomainSpec",
    "ErrorReport",
    "LossBreakdown",
    "METHODS",
    "NetworkConfig",
    "NetworkParams",
    "Objective",
    "OptimizeResult",
    "OptimizerConfig",
    "ProblemSpec",
    "REGISTRY",
    "SamplerConfig",
    "TrainingReport",
    "TrainingSet",
    "WeightScheme",
    "assemble_loss",
    "bound_diagnostics",
    "build_training_set",
    "efk_energy",
    "ensemble_train",
    "generalization_error",
    "get_problem",
    "init_params",
    "lbfgs_minimize",
    "parameter_count",
    "weight",
]
