"""Initial/boundary data families and the two duct experiments on [1, 10]."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .conditions import BoundaryData, InitialData
from .errors import DomainError
from .model import GasParameters

EXPERIMENT_PROFILES = {"experiment1": "exp1", "experiment2": "exp2"}


@dataclass(frozen=True)
class ExpData:
    """Power-law data family.

    ``S_B = s0 (1+t)**-sb_decay``, ``R_B = r0 (1+t)**-rb_decay`` on the inflow
    boundary and ``S_0 = s0 * (a/a(x_b))**(s0p/s0)``, ``R_0 = r0 * (a/a(x_b))**(r0p/r0)``
    initially. Slopes left as ``None`` are fixed by the first-order corner
    compatibility at ``(x_b, 0)``.
    """

    s0: float
    r0: float
    sb_decay: float = 1.0
    rb_decay: float = 1.0
    s0_prime: float | None = None
    r0_prime: float | None = None


def default_exp_data(nu: float) -> ExpData:
    return ExpData(s0=1.0 - math.sqrt(nu), r0=1.0)


def corner_slopes(spec: ExpData, profile, gas: GasParameters) -> tuple[float, float]:
    """Initial slopes ``(S_0'(x_b), R_0'(x_b))`` that satisfy the corner ODE relations."""
    g = gas.gamma
    s0, r0 = spec.s0, spec.r0
    kb = profile.k(profile.x_b)
    src = (g - 1.0) / 8.0 * kb * (r0 * r0 - s0 * s0)
    sbp = -spec.sb_decay * s0
    rbp = -spec.rb_decay * r0
    lam1 = 0.25 * (g + 1.0) * s0 + 0.25 * (3.0 - g) * r0
    lam2 = 0.25 * (3.0 - g) * s0 + 0.25 * (g + 1.0) * r0
    return (src - sbp) / lam1, (-src - rbp) / lam2


def build_exp_data(spec: ExpData, profile, gas: GasParameters):
    """Return ``(InitialData, BoundaryData)`` for the power-law family."""
    sp_auto, rp_auto = corner_slopes(spec, profile, gas)
    s0p = sp_auto if spec.s0_prime is None else spec.s0_prime
    r0p = rp_auto if spec.r0_prime is None else spec.r0_prime
    s0, r0 = spec.s0, spec.r0
    if s0 == 0 or r0 == 0:
        raise DomainError("exp-data needs nonzero s0 and r0")
    # exponents chosen so that S0'(x_b) = s0p and R0'(x_b) = r0p
    ab, dab = profile.a(profile.x_b), profile.da(profile.x_b)
    if dab <= 0:
        raise DomainError("exp-data needs a'(x_b) > 0")
    ps = s0p / s0 * ab / dab
    pr = r0p / r0 * ab / dab

    def s_init(x):
        return s0 * (profile.a(x) / ab) ** ps

    def r_init(x):
        return r0 * (profile.a(x) / ab) ** pr

    initial = InitialData(
        S0=s_init,
        R0=r_init,
        dS0=lambda x: ps * s_init(x) * profile.k(x),
        dR0=lambda x: pr * r_init(x) * profile.k(x),
        x_b=profile.x_b,
        x_c=profile.x_c,
    )
    qs, qr = spec.sb_decay, spec.rb_decay
    boundary = BoundaryData(
        SB=lambda t: s0 * (1.0 + np.asarray(t, dtype=float)) ** (-qs),
        RB=lambda t: r0 * (1.0 + np.asarray(t, dtype=float)) ** (-qr),
        dSB=lambda t: -qs * s0 * (1.0 + np.asarray(t, dtype=float)) ** (-qs - 1.0),
        dRB=lambda t: -qr * r0 * (1.0 + np.asarray(t, dtype=float)) ** (-qr - 1.0),
    )
    return initial, boundary


def experiment_slopes(nu: float) -> tuple[float, float]:
    """Closed forms of the corner slopes for gamma = 7/5, k(1) = 1."""
    q = math.sqrt(nu)
    return (20 - 18 * q - nu) / (20 - 12 * q), (20 - 2 * q + nu) / (20 - 8 * q)


def experiment(tag: str, nu: float, x_c: float = 10.0):
    """Profile, gas and data of ``experiment1`` / ``experiment2``."""
    try:
        kind = EXPERIMENT_PROFILES[tag]
    except KeyError:
        raise DomainError(f"unknown experiment {tag!r}") from None
    profile = geometry.exp1(1.0, x_c) if kind == "exp1" else geometry.exp2(1.0, x_c)
    gas = GasParameters(gamma=1.4, nu=nu)
    initial, boundary = build_exp_data(default_exp_data(nu), profile, gas)
    return profile, gas, initial, boundary
