"""sqfn: a numerical laboratory for multilinear square functions,
Carleson-type cancellation constants, and Muckenhoupt weights."""

from .backend import BACKEND
from .errors import (
    CapacityError,
    ConfigurationError,
    ContractError,
    DegenerateDomainError,
    KernelError,
    ParameterError,
    SqfnError,
)
from .lab import ExperimentReport, run_scenario, run_suite

__all__ = [
    "BACKEND",
    "CapacityError",
    "ConfigurationError",
    "ContractError",
    "DegenerateDomainError",
    "ExperimentReport",
    "KernelError",
    "ParameterError",
    "SqfnError",
    "run_scenario",
    "run_suite",
]
__version__ = "0.1.0"
