"""Gas parameters and the pointwise algebra of the rescaled Euler system.

Everything here is dimensionless. The rescaled density ``rho`` relates to the
physical one through ``rho_eta = ((gamma - 1) nu / gamma)**(1/(gamma - 1)) rho``,
and the flow is described either by primitives ``(rho, v)`` or by the Riemann
invariants ``(S, R)``. All functions broadcast over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError

# b within this distance of -1 selects the logarithmic formulas
B_MINUS_ONE_TOL = 1e-12


def _check_gamma(gamma: float) -> None:
    if not (1.0 < gamma < 3.0) or not math.isfinite(gamma):
        raise DomainError(f"gamma must lie strictly inside (1, 3), got {gamma!r}")


def lax_exponent(gamma: float) -> float:
    """Exponent ``b = -(3 - gamma) / (2 (gamma - 1))``; negative on (1, 3).

    Values within rounding of an integer are snapped to it, so gamma = 7/5
    gives exactly -2 and gamma = 5/3 exactly -1.
    """
    _check_gamma(gamma)
    b = -(3.0 - gamma) / (2.0 * (gamma - 1.0))
    nearest = round(b)
    return float(nearest) if abs(b - nearest) <= B_MINUS_ONE_TOL else b


def nu_from_eta(eta: float, gamma: float) -> float:
    _check_gamma(gamma)
    if not eta > 0 or not math.isfinite(eta):
        raise DomainError(f"eta must be positive, got {eta!r}")
    return gamma / (gamma - 1.0) * eta ** (gamma - 1.0)


def eta_from_nu(nu: float, gamma: float) -> float:
    _check_gamma(gamma)
    if not nu > 0 or not math.isfinite(nu):
        raise DomainError(f"nu must be positive, got {nu!r}")
    return ((gamma - 1.0) / gamma * nu) ** (1.0 / (gamma - 1.0))


@dataclass(frozen=True)
class GasParameters:
    """Adiabatic exponent and rescaled smallness parameter.

    Build from ``nu`` directly or with :meth:`from_eta`. ``eta`` and ``b`` are
    derived on read, so the three can never drift apart.
    """

    gamma: float
    nu: float

    def __post_init__(self):
        _check_gamma(self.gamma)
        if not self.nu > 0 or not math.isfinite(self.nu):
            raise DomainError(f"nu must be positive, got {self.nu!r}")

    @classmethod
    def from_eta(cls, gamma: float, eta: float) -> "GasParameters":
        return cls(gamma=gamma, nu=nu_from_eta(eta, gamma))

    @property
    def eta(self) -> float:
        return eta_from_nu(self.nu, self.gamma)

    @property
    def b(self) -> float:
        return lax_exponent(self.gamma)

    @property
    def log_branch(self) -> bool:
        """True when ``b`` is close enough to -1 to need the logarithmic forms."""
        return abs(self.b + 1.0) <= B_MINUS_ONE_TOL

    @property
    def sound_coeff(self) -> float:
        # 2 sqrt(nu / (gamma - 1)): R - S = 2 * sound_coeff * rho**((gamma-1)/2)
        return 2.0 * math.sqrt(self.nu / (self.gamma - 1.0))


class PrimitiveState(NamedTuple):
    rho: np.ndarray | float
    v: np.ndarray | float


class RiemannState(NamedTuple):
    S: np.ndarray | float
    R: np.ndarray | float


def riemann_from_primitive(state: PrimitiveState, params: GasParameters) -> RiemannState:
    rho = np.asarray(state.rho, dtype=float)
    if np.any(rho < 0):
        raise DomainError("density must be nonnegative")
    w = params.sound_coeff * rho ** ((params.gamma - 1.0) / 2.0)
    v = np.asarray(state.v, dtype=float)
    return RiemannState(_unwrap(v - w), _unwrap(v + w))


def primitive_from_riemann(state: RiemannState, params: GasParameters) -> PrimitiveState:
    S = np.asarray(state.S, dtype=float)
    R = np.asarray(state.R, dtype=float)
    if np.any(S > R):
        raise DomainError("S > R corresponds to negative density")
    g = params.gamma
    coeff = ((g - 1.0) / (16.0 * params.nu)) ** (1.0 / (g - 1.0))
    rho = coeff * (R - S) ** (2.0 / (g - 1.0))
    return PrimitiveState(_unwrap(rho), _unwrap(0.5 * (S + R)))


def physical_density(rho, params: GasParameters):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise DomainError("density must be nonnegative")
    g = params.gamma
    return _unwrap(((g - 1.0) * params.nu / g) ** (1.0 / (g - 1.0)) * rho)


def physical_density_from_riemann(state: RiemannState, gamma: float):
    """Physical density straight from ``R - S``; independent of ``nu``."""
    _check_gamma(gamma)
    diff = np.asarray(state.R, dtype=float) - np.asarray(state.S, dtype=float)
    if np.any(diff < 0):
        raise DomainError("S > R corresponds to negative density")
    coeff = ((gamma - 1.0) ** 2 / (16.0 * gamma)) ** (1.0 / (gamma - 1.0))
    return _unwrap(coeff * diff ** (2.0 / (gamma - 1.0)))


def eigenvalues(state: RiemannState, params: GasParameters):
    """Characteristic speeds ``(lambda1, lambda2)`` written in the invariants."""
    g = params.gamma
    S = np.asarray(state.S, dtype=float)
    R = np.asarray(state.R, dtype=float)
    lam1 = 0.25 * (g + 1.0) * S + 0.25 * (3.0 - g) * R
    lam2 = 0.25 * (3.0 - g) * S + 0.25 * (g + 1.0) * R
    return _unwrap(lam1), _unwrap(lam2)


def eigenvalues_primitive(state: PrimitiveState, params: GasParameters):
    """Same speeds from ``v -/+ sqrt(nu (gamma-1)) rho**((gamma-1)/2)``."""
    g = params.gamma
    c = math.sqrt(params.nu * (g - 1.0)) * np.asarray(state.rho, dtype=float) ** ((g - 1.0) / 2.0)
    v = np.asarray(state.v, dtype=float)
    return _unwrap(v - c), _unwrap(v + c)


def source_g(x, state: RiemannState, profile, params: GasParameters):
    """Source ``g = (gamma - 1)/8 * k(x) * (R**2 - S**2)`` of the invariant system."""
    k = profile.k(x)
    S = np.asarray(state.S, dtype=float)
    R = np.asarray(state.R, dtype=float)
    return _unwrap((params.gamma - 1.0) / 8.0 * k * (R * R - S * S))


def _unwrap(a):
    a = np.asarray(a)
    return a.item() if a.ndim == 0 else a
