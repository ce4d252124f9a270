"""Characteristic curves and particle paths through a recorded run.

Speeds and field values are interpolated bilinearly in ``(x, t)``, so
interpolation never overshoots the recorded data. A cubic-in-``x`` sampler is
available for sharper along-curve values when the field is known to be smooth.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, PreconditionError
from .model import GasParameters, RiemannState, eigenvalues

FAMILIES = ("1", "2", "particle")
EXITS = ("left-domain-right", "reached-t-end", "hit-boundary")
TRACE_COLUMNS = ("t", "x", "S", "R", "xi")


class SpaceTimeField:
    """Stack of snapshots on one grid with a constant time stride."""

    def __init__(self, snapshots, gas: GasParameters, stride_tol: float = 1e-9):
        if len(snapshots) < 2:
            raise ConfigError("a space-time field needs at least two snapshots")
        x = np.asarray(snapshots[0].x)
        for s in snapshots[1:]:
            if s.x.shape != x.shape or np.any(s.x != x):
                raise ConfigError("snapshots do not share one grid")
        t = np.array([s.t for s in snapshots], dtype=float)
        steps = np.diff(t)
        if np.any(steps <= 0) or np.ptp(steps) > stride_tol * max(1.0, t[-1]):
            raise ConfigError("snapshot times must be uniformly spaced")
        self.gas = gas
        self.x = x
        self.t = t
        self.dt = float(steps.mean())
        self.dx = float(x[1] - x[0])
        self.rho = np.stack([s.rho for s in snapshots])
        self.v = np.stack([s.v for s in snapshots])
        self.S = np.stack([s.S for s in snapshots])
        self.R = np.stack([s.R for s in snapshots])
        lam1, lam2 = eigenvalues(RiemannState(self.S, self.R), gas)
        self.lam1, self.lam2 = np.asarray(lam1), np.asarray(lam2)
        self.out_of_domain = 0

    @classmethod
    def from_arrays(cls, x, t, S, R, gas: GasParameters, rho=None, v=None):
        """Build from gridded ``S(t, x)``, ``R(t, x)`` (synthetic fields in tests)."""
        obj = cls.__new__(cls)
        obj.gas = gas
        obj.x = np.asarray(x, dtype=float)
        obj.t = np.asarray(t, dtype=float)
        obj.dt = float(obj.t[1] - obj.t[0])
        obj.dx = float(obj.x[1] - obj.x[0])
        obj.S = np.asarray(S, dtype=float)
        obj.R = np.asarray(R, dtype=float)
        obj.v = 0.5 * (obj.S + obj.R) if v is None else np.asarray(v, dtype=float)
        if rho is None:
            g = gas.gamma
            coeff = ((g - 1.0) / (16.0 * gas.nu)) ** (1.0 / (g - 1.0))
            rho = coeff * np.maximum(obj.R - obj.S, 0.0) ** (2.0 / (g - 1.0))
        obj.rho = np.asarray(rho, dtype=float)
        lam1, lam2 = eigenvalues(RiemannState(obj.S, obj.R), gas)
        obj.lam1 = np.broadcast_to(lam1, obj.S.shape)
        obj.lam2 = np.broadcast_to(lam2, obj.S.shape)
        obj.out_of_domain = 0
        return obj

    @property
    def x_b(self) -> float:
        return float(self.x[0])

    @property
    def x_c(self) -> float:
        return float(self.x[-1])

    def contains(self, x, t) -> bool:
        return bool(self.x[0] <= x <= self.x[-1] and self.t[0] <= t <= self.t[-1])

    def _locate(self, x, t):
        xc = min(max(x, self.x[0]), self.x[-1])
        tc = min(max(t, self.t[0]), self.t[-1])
        if xc != x or tc != t:
            self.out_of_domain += 1
        i = min(int((xc - self.x[0]) / self.dx), self.x.size - 2)
        n = min(int((tc - self.t[0]) / self.dt), self.t.size - 2)
        return xc, tc, i, n

    def bilinear(self, name: str, x: float, t: float) -> float:
        arr = getattr(self, name)
        xc, tc, i, n = self._locate(x, t)
        px = (xc - self.x[i]) / self.dx
        pt = (tc - self.t[n]) / self.dt
        # lerp form keeps constant data exact
        lo = arr[n, i] + px * (arr[n, i + 1] - arr[n, i])
        hi = arr[n + 1, i] + px * (arr[n + 1, i + 1] - arr[n + 1, i])
        return float(lo + pt * (hi - lo))

    def speed(self, family: str, x: float, t: float) -> float:
        name = {"1": "lam1", "2": "lam2", "particle": "v"}[family]
        return self.bilinear(name, x, t)

    def cubic_in_x(self, name: str, x: float, t: float) -> float:
        """Cubic Lagrange in ``x`` at the bracketing snapshots, linear in ``t``."""
        arr = getattr(self, name)
        xc, tc, i, n = self._locate(x, t)
        j = min(max(i - 1, 0), self.x.size - 4)
        nodes = self.x[j:j + 4]
        w = np.ones(4)
        for a in range(4):
            for c in range(4):
                if c != a:
                    w[a] *= (xc - nodes[c]) / (nodes[a] - nodes[c])
        pt = (tc - self.t[n]) / self.dt
        lo = w @ arr[n, j:j + 4]
        if pt == 0.0:
            return float(lo)
        hi = w @ arr[n + 1, j:j + 4]
        return float((1 - pt) * lo + pt * hi)


@dataclass
class CurveTrace:
    family: str
    x0: float
    t0: float
    t: np.ndarray
    x: np.ndarray
    S: np.ndarray
    R: np.ndarray
    rho: np.ndarray
    exit_reason: str
    exit_time: float
    clamped: int = 0

    @property
    def xi(self) -> np.ndarray:
        return self.R / self.S - 1.0

    def filename(self) -> str:
        return f"trace_{self.family}_{self.x0:g}_{self.t0:g}.csv"

    def write_csv(self, out_dir) -> Path:
        path = Path(out_dir) / self.filename()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_COLUMNS)
            for row in zip(self.t, self.x, self.S, self.R, self.xi):
                w.writerow([repr(float(c)) for c in row])
        return path


def trace(fld: SpaceTimeField, start: tuple[float, float], family="1",
          stride: float | None = None, sampling: str = "linear") -> CurveTrace:
    """Integrate ``dx/dt = speed`` forward with RK4 from ``start = (x0, t0)``.

    The default stride is the snapshot stride. Tracing stops when the curve
    leaves through ``x_c``, falls back through ``x_b`` or reaches the last
    recorded time. ``sampling`` is ``"linear"`` or ``"cubic"`` for the
    along-curve values.
    """
    family = str(family)
    if sampling not in ("linear", "cubic"):
        raise ConfigError("sampling must be 'linear' or 'cubic'")
    sample = fld.bilinear if sampling == "linear" else fld.cubic_in_x
    if family not in FAMILIES:
        raise ConfigError(f"family must be one of {FAMILIES}")
    x0, t0 = map(float, start)
    if not fld.contains(x0, t0):
        raise ConfigError(f"start ({x0}, {t0}) lies outside the recorded domain")
    h = fld.dt if stride is None else float(stride)
    if not h > 0:
        raise ConfigError("stride must be positive")
    before = fld.out_of_domain
    t_end = float(fld.t[-1])
    ts, xs = [t0], [x0]
    x, t = x0, t0
    reason, t_exit = "reached-t-end", t_end

    def f(xx, tt):
        return fld.speed(family, xx, tt)

    while t < t_end - 1e-12 * max(1.0, t_end):
        dt = min(h, t_end - t)
        k1 = f(x, t)
        k2 = f(x + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = f(x + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = f(x + dt * k3, t + dt)
        x_new = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t_new = t + dt
        edge = fld.x_c if x_new > fld.x_c else (fld.x_b if x_new < fld.x_b else None)
        if edge is not None:
            reason = "left-domain-right" if edge == fld.x_c else "hit-boundary"
            t_exit = t + dt * (edge - x) / (x_new - x)
            break
        # snap to the snapshot grid to stop round-off drift in t
        m = round((t_new - fld.t[0]) / fld.dt)
        if abs(fld.t[0] + m * fld.dt - t_new) < 1e-9 * fld.dt:
            t_new = float(fld.t[0] + m * fld.dt)
        x, t = x_new, t_new
        ts.append(t)
        xs.append(x)
    ts = np.array(ts)
    xs = np.array(xs)
    S = np.array([sample("S", a, b) for a, b in zip(xs, ts)])
    R = np.array([sample("R", a, b) for a, b in zip(xs, ts)])
    rho = np.array([sample("rho", a, b) for a, b in zip(xs, ts)])
    return CurveTrace(family, x0, t0, ts, xs, S, R, rho, reason, float(t_exit),
                      fld.out_of_domain - before)


@dataclass(frozen=True)
class MonotonicityReport:
    s_increasing: bool
    r_decreasing: bool
    xi_decreasing: bool
    worst: float          # most negative signed margin (0 if none)
    worst_kind: str = ""
    worst_t: float = float("nan")

    @property
    def ok(self) -> bool:
        return self.s_increasing and self.r_decreasing and self.xi_decreasing


def monotonicity_report(tr: CurveTrace, tol: float = 1e-6) -> MonotonicityReport:
    """``S`` nondecreasing, ``R`` and ``xi`` nonincreasing along the trace, up to ``tol``."""
    if tr.t.size < 2:
        raise PreconditionError("trace needs at least two samples")
    margins = {
        "S": np.diff(tr.S),
        "R": -np.diff(tr.R),
        "xi": -np.diff(tr.xi),
    }
    worst, kind, when = 0.0, "", float("nan")
    for name, m in margins.items():
        i = int(np.argmin(m))
        if m[i] < worst:
            worst, kind, when = float(m[i]), name, float(tr.t[i + 1])
    ok = {name: bool(np.min(m) >= -tol) for name, m in margins.items()}
    return MonotonicityReport(ok["S"], ok["R"], ok["xi"], worst, kind, when)


@dataclass(frozen=True)
class VacuumReport:
    passed: bool
    worst_margin: float
    worst_t: float
    lower: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)


def vacuum_equivalence_check(tr: CurveTrace, params: GasParameters, M: float,
                             tol: float = 1e-8) -> VacuumReport:
    """``c rho^p / M <= xi <= c rho^p / S(start)`` with ``c = 4 sqrt(nu/(gamma-1))``."""
    if M < float(np.max(tr.R)):
        raise PreconditionError(f"M={M} is below max R along the trace", witness=float(M))
    S_start = float(tr.S[0])
    if not S_start > 0:
        raise PreconditionError("trace must start where S > 0", witness=tr.t0)
    g = params.gamma
    width = 4.0 * np.sqrt(params.nu / (g - 1.0)) * np.maximum(tr.rho, 0.0) ** ((g - 1.0) / 2.0)
    lower = width / M
    upper = width / S_start
    xi = tr.xi
    m = np.minimum(xi - lower, upper - xi)
    i = int(np.argmin(m))
    return VacuumReport(bool(m[i] >= -tol), float(m[i]), float(tr.t[i]), lower, upper)


def default_starts(fld: SpaceTimeField, count: int = 10):
    """Half the starts on the initial line, half on the inflow boundary."""
    n_x = count // 2
    n_t = count - n_x
    xs = np.linspace(fld.x_b, fld.x_b + 0.8 * (fld.x_c - fld.x_b), n_x)
    t_hi = fld.t[0] + 0.8 * (fld.t[-1] - fld.t[0])
    ts = fld.t[0] + np.round(np.linspace(0, t_hi - fld.t[0], n_t + 1)[1:] / fld.dt) * fld.dt
    return [(float(x), float(fld.t[0])) for x in xs] + [(fld.x_b, float(t)) for t in ts]
