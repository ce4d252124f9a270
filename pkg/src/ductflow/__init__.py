"""Supersonic near-vacuum flow in divergent ducts: hypothesis checks, solver, diagnostics."""

from .errors import ConfigError, DomainError, PreconditionError, SolverAbort
from .model import GasParameters, PrimitiveState, RiemannState

__all__ = [
    "ConfigError", "DomainError", "PreconditionError", "SolverAbort",
    "GasParameters", "PrimitiveState", "RiemannState",
]
__version__ = "0.1.0"
