"""Hopf-bifurcation onset, third-order normal forms and direct simulation
for a diffusive predator-prey system with memory-delayed cross-diffusion and
predator-taxis on a one-dimensional Neumann interval."""

from . import cli, config, diagnostics, errors, linear, model, normalform, simulator
from .linear import HopfPoint, StabilityReport, classify
from .model import (
    KineticParams,
    SteadyState,
    TransportParams,
    kinetic_taylor,
    linearize,
    steady_state,
)
from .normalform import NormalForm, amplitude_prediction, normal_form
from .simulator import SimConfig, Trajectory, run
from .diagnostics import PeriodEstimate, detect, scaling_check

__version__ = "0.1.0"

__all__ = [
    "KineticParams",
    "TransportParams",
    "SteadyState",
    "steady_state",
    "linearize",
    "kinetic_taylor",
    "HopfPoint",
    "StabilityReport",
    "classify",
    "NormalForm",
    "normal_form",
    "amplitude_prediction",
    "SimConfig",
    "Trajectory",
    "run",
    "PeriodEstimate",
    "detect",
    "scaling_check",
    "cli",
    "config",
    "diagnostics",
    "errors",
    "linear",
    "model",
    "normalform",
    "simulator",
    "__version__",
]
