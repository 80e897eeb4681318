"""Gradient echo memory simulator and analytic cross-validation toolkit."""

from .analysis import (
    RunReport,
    build_report,
    chirp_estimate,
    efficiency,
    energy_balance,
    envelope_fidelity,
    sweep,
)
from .cascade import run_cascade
from .config import RunConfig
from .experiment import ExperimentScenario, build_experiment, run_experiment
from .gammafn import complex_gamma, gamma_phase_ratio
from .kernel import BACKEND as KERNEL_BACKEND
from .oracle import (
    broadening_ratio,
    cascade_map,
    flip_time_field,
    output_map,
    polarization_kernel,
    spectral_transfer,
)
from .params import (
    CascadeSpec,
    GridSpec,
    IntrinsicLineModel,
    MediumParams,
    Protocol,
    PulseSpec,
    discretize_line,
    nondimensionalize,
    sample_pulse,
)
from .solver import SolverState, SpaceTimeField, flip_sign, run, simulate, step

__version__ = "0.1.0"

__all__ = [
    "CascadeSpec",
    "ExperimentScenario",
    "GridSpec",
    "IntrinsicLineModel",
    "KERNEL_BACKEND",
    "MediumParams",
    "Protocol",
    "PulseSpec",
    "RunConfig",
    "RunReport",
    "SolverState",
    "SpaceTimeField",
    "broadening_ratio",
    "build_experiment",
    "build_report",
    "cascade_map",
    "chirp_estimate",
    "complex_gamma",
    "discretize_line",
    "efficiency",
    "energy_balance",
    "envelope_fidelity",
    "flip_sign",
    "flip_time_field",
    "gamma_phase_ratio",
    "nondimensionalize",
    "output_map",
    "polarization_kernel",
    "run",
    "run_cascade",
    "run_experiment",
    "sample_pulse",
    "simulate",
    "spectral_transfer",
    "step",
    "sweep",
]
