"""Transformed gradients and the Riccati equations they satisfy along characteristics.

With ``h = b ln(R - S)`` the quantities ``Y = e^h S_x + Q1`` and
``Z = e^h R_x + Q2`` obey

    dY/dt = A Y^2 + B Y + C        along dx/dt = lambda1
    dZ/dt = Ahat Z^2 + Bhat Z + Chat  along dx/dt = lambda2

where the offsets ``Q1, Q2`` are chosen to remove every mixed term. ``b = -1``
(gamma = 5/3) needs logarithmic antiderivatives and has its own formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import DomainError, PreconditionError
from .model import GasParameters, RiemannState, eigenvalues


def _gap(S, R):
    S = np.asarray(S, dtype=float)
    R = np.asarray(R, dtype=float)
    if np.any(R <= S):
        raise DomainError("transformed gradients need R > S")
    return S, R, R - S


def _out(a):
    a = np.asarray(a)
    return a.item() if a.ndim == 0 else a


class LaxQuantities(NamedTuple):
    h: float
    Q1: float
    Q2: float
    Y: float
    Z: float

    def gradients(self):
        """Recover ``(S_x, R_x)`` from ``(Y, Z)``."""
        w = np.exp(-np.asarray(self.h))
        return _out(w * (self.Y - self.Q1)), _out(w * (self.Z - self.Q2))


def offsets(S, R, k, params: GasParameters):
    """``(h, Q1, Q2)``; ``Q1 = Q2 = 0`` when ``k = 0``."""
    S, R, d = _gap(S, R)
    k = np.asarray(k, dtype=float)
    b = params.b
    if params.log_branch:
        L = np.log(d)
        h = -L
        q1 = -0.5 * k * S / d + 0.5 * k * L
        q2 = -0.5 * k * R / d - 0.5 * k * L
    else:
        h = b * np.log(d)
        db = d ** b
        q1 = k / (2 * b) * S * db + k / (2 * (b + 1)) * d * db
        q2 = k / (2 * b) * R * db - k / (2 * (b + 1)) * d * db
    return _out(h), _out(q1), _out(q2)


def lax_quantities(S, R, S_x, R_x, k, params: GasParameters) -> LaxQuantities:
    h, q1, q2 = offsets(S, R, k, params)
    eh = np.exp(np.asarray(h))
    Y = eh * np.asarray(S_x, dtype=float) + q1
    Z = eh * np.asarray(R_x, dtype=float) + q2
    return LaxQuantities(h, q1, q2, _out(Y), _out(Z))


@dataclass(frozen=True)
class RiccatiCoeffs:
    A: float
    B: float
    C: float
    Ahat: float
    Bhat: float
    Chat: float
    log_branch: bool

    def family(self, which: int):
        """``(A, B, C)`` of family 1 or 2."""
        if which == 1:
            return self.A, self.B, self.C
        if which == 2:
            return self.Ahat, self.Bhat, self.Chat
        raise ValueError("family must be 1 or 2")


def _power_coeffs(S, R, k, kp, b):
    d = R - S
    A = -(1 - b) / (1 - 2 * b) * d ** (-b)
    den = 2 * b * (b + 1) * (1 - 2 * b)
    p = b * (b * b + 3 * b - 2)
    q = b ** 3 + 2 * b * b + 3 * b - 2
    B = -k / den * (p * R + q * S)
    Bh = -k / den * (p * S + q * R)

    def c1(u, w):
        # u is the invariant of the family, w the other one
        quad = k * k / (8 * b * b * (b + 1) ** 2 * (1 - 2 * b)) * (
            b * (1 - b) ** 2 * w * w + 2 * p * w * u + q * u * u)
        lin = kp / (4 * b * (b + 1) * (1 - 2 * b)) * (
            b * (1 - b) * w * w - 2 * b * b * w * u + (2 - 3 * b - b * b) * u * u)
        return quad + lin

    db = d ** b
    return A, B, db * c1(S, R), A, Bh, db * c1(R, S)


def _log_coeffs(S, R, k, kp):
    d = R - S
    L = np.log(d)
    A = -2.0 / 3.0 * d
    B = k / 6 * (R - 4 * S + 4 * d * L)
    Bh = k / 6 * (S - 4 * R - 4 * d * L)
    c1 = (k * k / 24 * (-2 * R * d * L + 8 * S * d * L - 4 * d * d * L * L - 3 * R * R - 3 * S * S)
          + kp / 24 * (2 * (R * R - S * S) - (4 * R + 8 * S) * (S - d * L)))
    c1h = (k * k / 24 * (2 * S * d * L - 8 * R * d * L - 4 * d * d * L * L - 3 * S * S - 3 * R * R)
           + kp / 24 * (2 * (S * S - R * R) - (4 * S + 8 * R) * (R + d * L)))
    return A, B, c1 / d, A, Bh, c1h / d


def riccati_coeffs(S, R, k, kprime, params: GasParameters) -> RiccatiCoeffs:
    S, R, _ = _gap(S, R)
    k = np.asarray(k, dtype=float)
    kp = np.asarray(kprime, dtype=float)
    if params.log_branch:
        vals = _log_coeffs(S, R, k, kp)
    else:
        vals = _power_coeffs(S, R, k, kp, params.b)
    return RiccatiCoeffs(*(_out(v) for v in vals), log_branch=params.log_branch)


def c_sign_leading(S, R, k, kprime, params: GasParameters):
    """Small-xi leading term ``S^(b+2) xi^b (k'/(2b) - k^2/(4b^2))`` of ``C`` and ``Chat``."""
    S, R, _ = _gap(S, R)
    if np.any(S <= 0):
        raise DomainError("leading-order estimate needs S > 0")
    b = params.b
    xi = R / S - 1.0
    k = np.asarray(k, dtype=float)
    return _out(S ** (b + 2) * xi ** b * (-k * k / (4 * b * b) + np.asarray(kprime) / (2 * b)))


def split_roots(coeffs: RiccatiCoeffs, family: int = 1):
    """Roots ``W1 <= 0 <= W2`` of ``A W^2 + B W + C``, or ``None`` when ``C < 0``."""
    A, B, C = (float(c) for c in coeffs.family(family))
    return quadratic_split(A, B, C)


def quadratic_split(A: float, B: float, C: float):
    if not A < 0:
        raise PreconditionError(f"root splitting needs A < 0, got {A!r}")
    if C < 0:
        return None
    disc = math.sqrt(B * B - 4 * A * C)      # >= |B| since A C <= 0
    # cancellation-free pair
    q = -0.5 * (B + math.copysign(disc, B)) if B != 0 else -0.5 * disc
    if q == 0:
        return 0.0, 0.0
    r1, r2 = q / A, C / q
    return (min(r1, r2), max(r1, r2))


def separating_line(W1_samples, W2_samples):
    """Midpoint of the band ``[max W1, min W2]``, or ``None`` if the band is empty."""
    lo = float(np.max(W1_samples))
    hi = float(np.min(W2_samples))
    if lo > hi:
        return None
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class RiccatiBound:
    """Envelope ``0 <= W(t) <= upper(t)`` on ``[t_start, t_end]``."""

    t: np.ndarray
    values: np.ndarray
    step: float

    lower: float = 0.0

    def upper(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t[0] - 1e-12) or np.any(t > self.t[-1] + 1e-12):
            raise DomainError("time outside the bound's horizon")
        return _out(np.interp(t, self.t, self.values))

    __call__ = upper


def _sample(fn, t):
    return np.broadcast_to(np.asarray(fn(t), dtype=float), t.shape)


def riccati_bound(A_fn: Callable, W1_fn: Callable, W2_fn: Callable, W0: float,
                  horizon: tuple[float, float], step: float = 1e-3) -> RiccatiBound:
    """Upper envelope ``W0 - 1/4 int A (W2 - W1)^2`` for ``W' = A (W - W1)(W - W2)``.

    Needs ``A < 0``, ``W1 <= 0 <= W2`` on the sampled horizon and ``W0 >= 0``.
    The integral uses composite Simpson on a grid of spacing at most ``step``
    (error O(step^4)); the envelope is made nondecreasing explicitly.
    """
    t1, t2 = map(float, horizon)
    if not t2 >= t1:
        raise PreconditionError("empty horizon")
    if not W0 >= 0:
        raise PreconditionError(f"W0 must be >= 0, got {W0!r}", witness=t1)
    if not step > 0:
        raise PreconditionError("step must be positive")
    n = max(2, 2 * math.ceil((t2 - t1) / (2 * step)))
    t = np.linspace(t1, t2, n + 1)
    A = _sample(A_fn, t)
    W1 = _sample(W1_fn, t)
    W2 = _sample(W2_fn, t)
    for bad, what in ((A >= 0, "A < 0"), (W1 > 0, "W1 <= 0"), (W2 < 0, "W2 >= 0")):
        if bad.any():
            i = int(np.argmax(bad))
            raise PreconditionError(f"{what} fails at t={t[i]:.6g}", witness=float(t[i]))
    integrand = -0.25 * A * (W2 - W1) ** 2
    if t2 == t1:
        vals = np.full_like(t, float(W0))
    else:
        cum = cumulative_simpson(integrand, x=t, initial=0.0)
        vals = np.maximum.accumulate(W0 + cum)
    return RiccatiBound(t, vals, (t2 - t1) / n)


def integrate_riccati(rate: Callable, W0: float, horizon: tuple[float, float],
                      n_steps: int = 1000):
    """Classical RK4 for ``W' = rate(t, W)``; returns ``(t, W)`` arrays."""
    t1, t2 = map(float, horizon)
    t = np.linspace(t1, t2, n_steps + 1)
    W = np.empty_like(t)
    W[0] = w = float(W0)
    dt = (t2 - t1) / n_steps
    for i in range(n_steps):
        s = t[i]
        k1 = rate(s, w)
        k2 = rate(s + 0.5 * dt, w + 0.5 * dt * k1)
        k3 = rate(s + 0.5 * dt, w + 0.5 * dt * k2)
        k4 = rate(s + dt, w + dt * k3)
        w = w + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        W[i + 1] = w
    return t, W


def factored_rate(A_fn, W1_fn, W2_fn):
    """``rate(t, W) = A(t) (W - W1(t)) (W - W2(t))``."""
    def rate(t, w):
        return float(A_fn(t)) * (w - float(W1_fn(t))) * (w - float(W2_fn(t)))
    return rate


def characteristic_residual(field: Callable, profile, params: GasParameters, family: int,
                            x0: float, t0: float, dt: float, n_steps: int,
                            difference_order: int = 2):
    """Residual ``dW/dt - (A W^2 + B W + C)`` along one characteristic of a given field.

    ``field(x, t)`` returns ``(S, R, S_x, R_x)`` of an exact solution. The curve
    is advanced with RK4 at stride ``dt``; ``dW/dt`` is a central difference
    of ``difference_order`` 2 or 4 over the curve nodes, so for exact fields
    the residual is O(dt^difference_order). Returns ``(t, residual)`` at the
    nodes where the difference is defined.
    """
    if family not in (1, 2):
        raise ValueError("family must be 1 or 2")
    if difference_order not in (2, 4):
        raise ValueError("difference_order must be 2 or 4")

    def speed(x, t):
        S, R, _, _ = field(x, t)
        return eigenvalues(RiemannState(S, R), params)[family - 1]

    ts = t0 + dt * np.arange(n_steps + 1)
    xs = np.empty_like(ts)
    xs[0] = x = x0
    for i in range(n_steps):
        t = ts[i]
        k1 = speed(x, t)
        k2 = speed(x + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = speed(x + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = speed(x + dt * k3, t + dt)
        x = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        xs[i + 1] = x
    S, R, Sx, Rx = (np.asarray(v, dtype=float) for v in field(xs, ts))
    k = np.asarray(profile.k(xs), dtype=float)
    kp = np.asarray(profile.dk(xs), dtype=float)
    lq = lax_quantities(S, R, Sx, Rx, k, params)
    W = np.asarray(lq.Y if family == 1 else lq.Z)
    co = riccati_coeffs(S, R, k, kp, params)
    A, B, C = (np.asarray(c) for c in co.family(family))
    if difference_order == 2:
        m = 1
        dW = (W[2:] - W[:-2]) / (2 * dt)
    else:
        m = 2
        dW = (W[:-4] - 8 * W[1:-3] + 8 * W[3:-1] - W[4:]) / (12 * dt)
    return ts[m:-m], dW - (A * W * W + B * W + C)[m:-m]
