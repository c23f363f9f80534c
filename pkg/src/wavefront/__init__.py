"""Monotone travelling-wave fronts of delayed reaction-diffusion systems.

perron   bounded-solution operator G on uniform grids, counterexamples
engine   the operator H, upper/lower checks and the monotone iteration
models   delayed predator-prey and Belousov-Zhabotinskii instances
pde      method-of-lines time integration and front tracking
cli      command line interface
"""
from .engine import (
    IterationReport,
    ModelSpec,
    VerificationReport,
    check_lower,
    check_quasi_monotone,
    check_upper,
    derivative_bound,
    evaluate_H,
    iterate,
)
from .models import (
    BZParams,
    ClosedFormFront,
    FrontPair,
    PredatorPreyParams,
    bz_lower,
    bz_model,
    bz_upper,
    pp_cstar,
    pp_lower,
    pp_model,
    pp_upper,
)
from .pde import SimConfig, SimResult, front_speed, profile_drift, simulate
from .perron import (
    GreenKernel,
    Grid,
    Profile,
    TailSpec,
    apply_green,
    apply_green_system,
    counterexample_nonuniqueness,
    ma_identity_discrepancy,
    make_kernel,
    make_ode_kernel,
    ode_residual,
)

__version__ = "0.1.0"

__all__ = [
    "IterationReport",
    "ModelSpec",
    "VerificationReport",
    "check_lower",
    "check_quasi_monotone",
    "check_upper",
    "derivative_bound",
    "evaluate_H",
    "iterate",
    "BZParams",
    "ClosedFormFront",
    "FrontPair",
    "PredatorPreyParams",
    "bz_lower",
    "bz_model",
    "bz_upper",
    "pp_cstar",
    "pp_lower",
    "pp_model",
    "pp_upper",
    "GreenKernel",
    "Grid",
    "Profile",
    "TailSpec",
    "apply_green",
    "apply_green_system",
    "counterexample_nonuniqueness",
    "ma_identity_discrepancy",
    "make_kernel",
    "make_ode_kernel",
    "ode_residual",
    "SimConfig",
    "SimResult",
    "front_speed",
    "profile_drift",
    "simulate",
]
