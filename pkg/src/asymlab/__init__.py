"""Numerical laboratory for asymptotic spectral functionals of positive operators."""
from .kernels import BACKEND
from .numerics import GridSpec, LogScalar, lower_incomplete_gamma, make_grid, upper_incomplete_gamma
from .profiles import (
    PiecewiseProfile,
    ProfileError,
    Segment,
    distribution,
    evaluate,
    heat_integral,
    load_profile,
    make_canonical,
    make_counterexample,
    make_root,
    make_spike,
    partial_integral,
    power_integral,
    pth_power,
    save_profile,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "GridSpec",
    "LogScalar",
    "PiecewiseProfile",
    "ProfileError",
    "Segment",
    "__version__",
    "distribution",
    "evaluate",
    "heat_integral",
    "load_profile",
    "lower_incomplete_gamma",
    "make_canonical",
    "make_counterexample",
    "make_grid",
    "make_root",
    "make_spike",
    "partial_integral",
    "power_integral",
    "pth_power",
    "save_profile",
    "upper_incomplete_gamma",
]
