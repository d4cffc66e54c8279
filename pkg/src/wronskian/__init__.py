"""Wronskian Green's-function perturbation theory for 1D bound states.

Subpackages by layer: :mod:`fields` and :mod:`quadrature` (numerics),
:mod:`ode_green` (Wronskian identities), :mod:`series` (exact Puiseux
series), :mod:`wda` (iterative engine), :mod:`double_well` (worked example),
:mod:`oracle` (independent eigenvalue solver) and :mod:`cli`.
"""

from .exceptions import (
    BracketError,
    DegenerateError,
    InputError,
    IntegrationError,
    NumericRangeError,
    SingularIntegrandError,
    SolverError,
    WronskianError,
)
from .fields import GridFunction, ScalarField1D
from .series import EnergyExpansion, PuiseuxSeries

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "DegenerateError",
    "EnergyExpansion",
    "GridFunction",
    "InputError",
    "IntegrationError",
    "NumericRangeError",
    "PuiseuxSeries",
    "ScalarField1D",
    "SingularIntegrandError",
    "SolverError",
    "WronskianError",
]
