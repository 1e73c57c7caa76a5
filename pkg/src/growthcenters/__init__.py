"""Coupled autocatalytic growth of many units: simulation, steady state, and spread statistics."""

__version__ = "0.1.0"

from .dynamics import (EnvironmentTerm, GrowthSystem, StateVector, Trajectory, aggregate,
                       integrate, rhs, rhs_regrouped, share_rhs)
from .errors import (ConvergenceError, DegenerateError, GrowthError, InputError, NumericalError,
                     PositivityError)
from .spectral import SteadyState, build_matrix, dominant_eigenpair, steady_state

__all__ = [
    "EnvironmentTerm", "GrowthSystem", "StateVector", "Trajectory", "aggregate", "integrate",
    "rhs", "rhs_regrouped", "share_rhs", "ConvergenceError", "DegenerateError", "GrowthError",
    "InputError", "NumericalError", "PositivityError", "SteadyState", "build_matrix",
    "dominant_eigenpair", "steady_state",
]
