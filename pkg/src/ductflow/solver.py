"""Finite-difference WENO5 / TVD-RK3 solver for the rescaled duct equations.

The unknowns ``(rho, v)`` live on the nodes ``x_j = x_b + j dx``, ``j = 0..n_cells``.
Node 0 is the inflow boundary and is pinned to the boundary data at every
Runge-Kutta stage; node ``n_cells`` is an ordinary outflow node. Three ghost
nodes on each side feed the WENO stencils.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np

from .conditions import BoundaryData, InitialData
from .diagnostics import NormSeries, norm_row
from .errors import ConfigError, SolverAbort
from .model import (GasParameters, PrimitiveState, RiemannState, eigenvalues,
                    primitive_from_riemann, riemann_from_primitive)

log = logging.getLogger(__name__)

GHOST = 3
SNAPSHOT_COLUMNS = ("x", "rho", "v", "S", "R", "xi")
INFLOW_MODES = ("ilw", "constant")

_IDEAL = (0.1, 0.6, 0.3)


@dataclass(frozen=True)
class Grid:
    x_b: float
    x_c: float
    n_cells: int
    ghost_width: int = GHOST

    def __post_init__(self):
        if not (self.n_cells >= 4 and self.x_c > self.x_b and math.isfinite(self.x_c)):
            raise ConfigError(f"bad grid [{self.x_b}, {self.x_c}] with {self.n_cells} cells")
        if self.ghost_width < 3:
            raise ConfigError("WENO5 needs at least 3 ghost nodes")

    @classmethod
    def from_spacing(cls, x_b: float, x_c: float, dx: float) -> "Grid":
        n = round((x_c - x_b) / dx)
        if n < 1 or abs(n * dx - (x_c - x_b)) > 1e-9 * (x_c - x_b):
            raise ConfigError(f"dx={dx} does not divide [{x_b}, {x_c}]")
        return cls(x_b, x_c, n)

    @property
    def dx(self) -> float:
        return (self.x_c - self.x_b) / self.n_cells

    @cached_property
    def x(self) -> np.ndarray:
        x = self.x_b + self.dx * np.arange(self.n_cells + 1)
        x[-1] = self.x_c
        x.setflags(write=False)
        return x


@dataclass(frozen=True)
class FieldSnapshot:
    """Nodal ``(rho, v)`` at one time; the invariants are derived on first access."""

    t: float
    x: np.ndarray
    rho: np.ndarray
    v: np.ndarray
    gas: GasParameters
    clipped: int = 0      # cumulative count of density floor events up to t

    def __post_init__(self):
        for name in ("x", "rho", "v"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.x.shape == self.rho.shape == self.v.shape):
            raise ValueError("snapshot arrays must conform to the grid")

    @cached_property
    def _riemann(self) -> RiemannState:
        return riemann_from_primitive(PrimitiveState(np.maximum(self.rho, 0.0), self.v), self.gas)

    @property
    def S(self) -> np.ndarray:
        return self._riemann.S

    @property
    def R(self) -> np.ndarray:
        return self._riemann.R

    @cached_property
    def xi(self) -> np.ndarray:
        return self.R / self.S - 1.0

    def write_csv(self, path) -> None:
        cols = (self.x, self.rho, self.v, self.S, self.R, self.xi)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(SNAPSHOT_COLUMNS)
            for row in zip(*cols):
                w.writerow([repr(float(c)) for c in row])

    @classmethod
    def read_csv(cls, path, gas: GasParameters, t: float | None = None) -> "FieldSnapshot":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if t is None:
            t = snapshot_time(path)
        return cls(t, data[:, 0], data[:, 1], data[:, 2], gas)


def snapshot_name(t: float) -> str:
    return f"snap_t{t:010.5f}.csv"


def snapshot_time(path) -> float:
    stem = Path(path).stem
    if not stem.startswith("snap_t"):
        raise ValueError(f"not a snapshot file: {path}")
    return float(stem[len("snap_t"):])


@dataclass(frozen=True)
class SolverConfig:
    gas: GasParameters
    profile: object
    grid: Grid
    cfl_ratio: float = 0.1
    t_final: float = 10.0
    snapshot_stride: int = 10
    weno_epsilon: float = 1e-6
    inflow: str = "ilw"
    outflow_order: int = 3

    def __post_init__(self):
        if not self.cfl_ratio > 0:
            raise ConfigError("cfl_ratio must be positive")
        if not self.t_final >= 0:
            raise ConfigError("t_final must be nonnegative")
        if self.snapshot_stride < 1:
            raise ConfigError("snapshot_stride must be >= 1")
        if not self.weno_epsilon > 0:
            raise ConfigError("weno_epsilon must be positive")
        if self.inflow not in INFLOW_MODES:
            raise ConfigError(f"inflow must be one of {INFLOW_MODES}")
        if not 0 <= self.outflow_order <= 4:
            raise ConfigError("outflow_order must lie in 0..4")
        if self.grid.x_b < self.profile.x_b - 1e-12 or self.grid.x_c > self.profile.x_c + 1e-12:
            raise ConfigError("grid extends beyond the duct profile")

    @property
    def dt(self) -> float:
        return self.cfl_ratio * self.grid.dx

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


# ---------------------------------------------------------------- WENO5


def _weno5_left(fm2, fm1, f0, fp1, fp2, eps):
    """Left-biased value at ``i + 1/2`` from ``f[i-2..i+2]`` (arrays broadcast)."""
    q0 = (2.0 * fm2 - 7.0 * fm1 + 11.0 * f0) / 6.0
    q1 = (-fm1 + 5.0 * f0 + 2.0 * fp1) / 6.0
    q2 = (2.0 * f0 + 5.0 * fp1 - fp2) / 6.0
    b0 = 13.0 / 12.0 * (fm2 - 2.0 * fm1 + f0) ** 2 + 0.25 * (fm2 - 4.0 * fm1 + 3.0 * f0) ** 2
    b1 = 13.0 / 12.0 * (fm1 - 2.0 * f0 + fp1) ** 2 + 0.25 * (fm1 - fp1) ** 2
    b2 = 13.0 / 12.0 * (f0 - 2.0 * fp1 + fp2) ** 2 + 0.25 * (3.0 * f0 - 4.0 * fp1 + fp2) ** 2
    a0 = _IDEAL[0] / (eps + b0) ** 2
    a1 = _IDEAL[1] / (eps + b1) ** 2
    a2 = _IDEAL[2] / (eps + b2) ** 2
    return (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2)


def weno5_reconstruct(stencil, bias: str = "left", eps: float = 1e-6) -> float:
    """Interface value from five samples ``f[i-2..i+2]``.

    ``bias="left"`` gives the upwind value at ``i + 1/2`` for rightward flow,
    ``bias="right"`` the mirror image at ``i - 1/2`` for leftward flow.
    Samples are read as cell averages, so quadratics are reproduced exactly.
    """
    s = np.asarray(stencil, dtype=float)
    if s.shape != (5,):
        raise ValueError("stencil must hold exactly 5 values")
    if bias == "left":
        return float(_weno5_left(*s, eps))
    if bias == "right":
        return float(_weno5_left(*s[::-1], eps))
    raise ValueError(f"bias must be 'left' or 'right', got {bias!r}")


# ---------------------------------------------------------------- spatial operator


def flux(rho, v, gas: GasParameters):
    return np.stack((rho * v, 0.5 * v * v + gas.nu * rho ** (gas.gamma - 1.0)))


def max_speed(rho, v, gas: GasParameters) -> float:
    c = math.sqrt(gas.nu * (gas.gamma - 1.0)) * np.maximum(rho, 0.0) ** ((gas.gamma - 1.0) / 2.0)
    return float(np.max(np.abs(v) + c))


def spatial_operator(ext, gas: GasParameters, dx: float, k_nodes, eps: float = 1e-6):
    """``L(U)`` on the interior nodes given ``ext`` with ``GHOST`` ghosts per side.

    ``ext`` has shape ``(2, n + 2*GHOST)`` holding ``(rho, v)``; the result has
    shape ``(2, n)``.
    """
    rho, v = ext
    f = flux(rho, v, gas)
    alpha = max_speed(rho, v, gas)
    fp = 0.5 * (f + alpha * ext)
    fm = 0.5 * (f - alpha * ext)
    n = ext.shape[1] - 2 * GHOST
    # interfaces j + 1/2 for j = -1..n-1
    m = n + 1
    left = _weno5_left(fp[:, 0:m], fp[:, 1:m + 1], fp[:, 2:m + 2], fp[:, 3:m + 3],
                       fp[:, 4:m + 4], eps)
    right = _weno5_left(fm[:, 5:m + 5], fm[:, 4:m + 4], fm[:, 3:m + 3], fm[:, 2:m + 2],
                        fm[:, 1:m + 1], eps)
    fhat = left + right
    out = -(fhat[:, 1:] - fhat[:, :-1]) / dx
    core = ext[:, GHOST:GHOST + n]
    out[0] -= k_nodes * core[0] * core[1]
    return out


def rhs(snapshot: FieldSnapshot, config: SolverConfig, boundary: BoundaryData | None = None):
    """Time derivative of ``(rho, v)`` at every node of ``snapshot``.

    Ghosts come from :func:`apply_boundaries`; without boundary data the
    inflow ghosts copy node 0.
    """
    u = np.stack((snapshot.rho, snapshot.v))
    ext = apply_boundaries(u, snapshot.t, boundary, config)
    k = config.profile.k(config.grid.x)
    out = spatial_operator(ext, config.gas, config.grid.dx, k, config.weno_epsilon)
    _check_finite(out, config.grid.x, snapshot.t)
    return out


# ---------------------------------------------------------------- boundaries


def _extrapolation_weights(order: int) -> np.ndarray:
    """Rows give ghost values at offsets 1..3 from nodes ``n-order..n``."""
    if order == 0:
        return np.ones((GHOST, 1))
    nodes = np.arange(-order, 1, dtype=float)
    targets = np.arange(1, GHOST + 1, dtype=float)
    w = np.empty((GHOST, order + 1))
    for r, s in enumerate(targets):
        for j, xj in enumerate(nodes):
            others = np.delete(nodes, j)
            w[r, j] = np.prod((s - others) / (xj - others))
    return w


def _inflow_weights() -> np.ndarray:
    """Quartic through ``p(0), p'(0), p(1), p(2), p(3)``, evaluated at ``-1, -2, -3``.

    Distances are in grid units; columns match ``[p0, dx*p'0, p1, p2, p3]``.
    """
    powers = np.arange(5)
    rows = [np.eye(5)[0], np.eye(5)[1]] + [float(s) ** powers for s in (1, 2, 3)]
    coeffs = np.linalg.inv(np.array(rows))
    ghosts = np.array([float(-s) ** powers for s in (1, 2, 3)])
    return ghosts @ coeffs


_INFLOW_W = _inflow_weights()


def boundary_state(boundary: BoundaryData, t: float, gas: GasParameters):
    """Inflow primitives ``(rho_B, v_B)``; raises unless both speeds are positive."""
    SB, RB = float(boundary.SB(t)), float(boundary.RB(t))
    lam1, lam2 = eigenvalues(RiemannState(SB, RB), gas)
    if not (lam1 > 0 and lam2 > 0):
        raise ConfigError(f"supersonic inflow required: lambda1={lam1:.6g} at t={t:g}")
    if SB > RB:
        raise ConfigError(f"boundary data has S_B > R_B at t={t:g}")
    rho, v = primitive_from_riemann(RiemannState(SB, RB), gas)
    return float(rho), float(v)


def apply_boundaries(u, t: float, boundary: BoundaryData | None, config: SolverConfig):
    """Return ``(2, n + 6)`` array: ``u`` with ghost nodes on both ends.

    Inflow ghosts (``config.inflow``):

    ``"ilw"``  quartic per invariant matching the boundary value, the boundary
               slope implied by the equations at ``x_b`` and nodes 1..3;
    ``"constant"``  all three ghosts hold the boundary state.

    Outflow ghosts extrapolate the last nodes with a polynomial of degree
    ``config.outflow_order`` (0 copies the last node).
    """
    gas = config.gas
    n = u.shape[1]
    ext = np.empty((2, n + 2 * GHOST))
    ext[:, GHOST:GHOST + n] = u
    p = config.outflow_order
    ext[:, GHOST + n:] = (_extrapolation_weights(p) @ u[:, n - 1 - p:].T).T
    if boundary is None:
        ext[:, :GHOST] = u[:, :1]
    elif config.inflow == "constant":
        ext[:, :GHOST] = np.array(boundary_state(boundary, t, gas))[:, None]
    else:
        ext[:, :GHOST] = _ilw_ghosts(u, t, boundary, config)[:, ::-1]
    np.maximum(ext[0], 0.0, out=ext[0])
    return ext


def _ilw_ghosts(u, t, boundary, config):
    """Inflow ghosts at ``x_b - dx, - 2dx, - 3dx`` (nearest first) as ``(rho, v)``."""
    gas = config.gas
    boundary_state(boundary, t, gas)
    SB, RB = float(boundary.SB(t)), float(boundary.RB(t))
    kb = float(config.profile.k(config.grid.x_b))
    g = (gas.gamma - 1.0) / 8.0 * kb * (RB * RB - SB * SB)
    lam1, lam2 = eigenvalues(RiemannState(SB, RB), gas)
    dx = config.grid.dx
    Sx = (g - float(boundary.dSB(t))) / lam1
    Rx = (-g - float(boundary.dRB(t))) / lam2
    S, R = riemann_from_primitive(PrimitiveState(np.maximum(u[0, 1:4], 0.0), u[1, 1:4]), gas)
    gS = _INFLOW_W @ np.r_[SB, dx * Sx, S]
    gR = _INFLOW_W @ np.r_[RB, dx * Rx, R]
    gR = np.maximum(gR, gS)
    rho, v = primitive_from_riemann(RiemannState(gS, gR), gas)
    return np.stack((rho, v))


# ---------------------------------------------------------------- time stepping


def rk3_step(u, t: float, dt: float, operator: Callable, pin: Callable | None = None):
    """One TVD-RK3 step of ``u' = operator(u, t)``.

    ``pin(u, t)`` may overwrite boundary values in place after each stage;
    stage times are ``t``, ``t + dt`` and ``t + dt/2``.
    """
    u = np.asarray(u, dtype=float)
    u1 = u + dt * operator(u, t)
    if pin is not None:
        pin(u1, t + dt)
    u2 = 0.75 * u + 0.25 * (u1 + dt * operator(u1, t + dt))
    if pin is not None:
        pin(u2, t + 0.5 * dt)
    u3 = u / 3.0 + 2.0 / 3.0 * (u2 + dt * operator(u2, t + 0.5 * dt))
    if pin is not None:
        pin(u3, t + dt)
    return u3


def _check_finite(arr, x, t):
    bad = ~np.isfinite(arr)
    if bad.any():
        j = int(np.argmax(bad.any(axis=0)))
        raise SolverAbort(f"non-finite values at x={x[j]:.6g}, t={t:.6g}", location=float(x[j]))


@dataclass
class SimulationRecord:
    config: SolverConfig
    snapshots: list = field(default_factory=list)
    series: NormSeries = field(default_factory=NormSeries)
    clip_events: int = 0
    steps: int = 0

    @property
    def final(self) -> FieldSnapshot:
        return self.snapshots[-1]

    def write(self, out_dir, every: int = 1) -> Path:
        """Write every ``every``-th snapshot (and always the last) plus the norm series."""
        out = Path(out_dir)
        (out / "snapshots").mkdir(parents=True, exist_ok=True)
        last = len(self.snapshots) - 1
        for i, s in enumerate(self.snapshots):
            if i % every == 0 or i == last:
                s.write_csv(out / "snapshots" / snapshot_name(s.t))
        self.series.write_csv(out / "diagnostics.csv")
        return out


def initial_state(config: SolverConfig, initial: InitialData, boundary: BoundaryData):
    x = config.grid.x
    rho, v = primitive_from_riemann(RiemannState(initial.S0(x), initial.R0(x)), config.gas)
    u = np.stack((np.atleast_1d(rho), np.atleast_1d(v))).astype(float)
    u[:, 0] = boundary_state(boundary, 0.0, config.gas)
    return u


def run_simulation(config: SolverConfig, initial: InitialData, boundary: BoundaryData, *,
                   report=None, force: bool = False, diag_stride: int = 1) -> SimulationRecord:
    """Advance from ``t = 0`` to ``config.t_final`` with the fixed step ``cfl_ratio * dx``.

    ``report`` is an optional validation report; a failing one stops the run
    unless ``force`` is set. Raises :class:`SolverAbort` on a CFL violation or
    non-finite state, carrying the last recorded snapshot.
    """
    if report is not None and not report.passed and not force:
        raise ConfigError("hypotheses not verified: " + ", ".join(report.failed_ids))
    gas, grid = config.gas, config.grid
    x, dx, dt = grid.x, grid.dx, config.dt
    k = config.profile.k(x)
    eps = config.weno_epsilon
    rec = SimulationRecord(config)
    u = initial_state(config, initial, boundary)

    clipped = 0

    def operator(w, tau):
        return spatial_operator(apply_boundaries(w, tau, boundary, config), gas, dx, k, eps)

    def pin(w, tau):
        nonlocal clipped
        w[:, 0] = boundary_state(boundary, tau, gas)
        neg = w[0] < 0
        if neg.any():
            clipped += int(neg.sum())
            w[0, neg] = 0.0

    def record(u, t):
        snap = FieldSnapshot(t, x, u[0], u[1], gas, clipped)
        rec.snapshots.append(snap)
        return snap

    def monitor(u, t):
        S, R = riemann_from_primitive(PrimitiveState(u[0], u[1]), gas)
        rec.series.append(norm_row(t, x, u[0], u[1], S, R))

    last = record(u, 0.0)
    monitor(u, 0.0)
    n_steps = config.n_steps
    for step in range(1, n_steps + 1):
        t0 = (step - 1) * dt
        speed = max_speed(u[0], u[1], gas)
        if config.cfl_ratio * speed >= 1.0:
            raise SolverAbort(f"CFL violated at t={t0:.6g}: max speed {speed:.6g}, "
                              f"cfl_ratio*speed = {config.cfl_ratio * speed:.4g}",
                              last_snapshot=last)
        try:
            u = rk3_step(u, t0, dt, operator, pin)
            _check_finite(u, x, step * dt)
        except SolverAbort as exc:
            exc.last_snapshot = last
            raise
        t = step * dt
        if step % diag_stride == 0 or step == n_steps:
            monitor(u, t)
        if step % config.snapshot_stride == 0 or step == n_steps:
            last = record(u, t)
    rec.clip_events = clipped
    rec.steps = n_steps
    if clipped:
        log.warning("density floored %d times", clipped)
    return rec
