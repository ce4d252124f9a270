"""Sup-norm monitoring and run-time checks of the a-priori estimates.

Claims are evaluated on recorded snapshots. A :class:`ClaimReport` carries the
smallest margin (positive = holds) and where it occurred, so a failure can be
reproduced from the stored snapshot alone.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import RiemannState, eigenvalues

NORM_COLUMNS = ("t", "sup_rho", "sup_v", "sup_rho_x", "sup_v_x", "min_S", "max_R", "sup_xi")
CLAIM_COLUMNS = ("claim_id", "pass", "worst_margin", "x", "t")

# the slope and xi-scaling claims only bind for small nu; above this they warn
STRICT_NU = 1e-3


def ddx(f, dx: float):
    """First derivative: 4th-order central inside, 2nd order at and next to the edges."""
    f = np.asarray(f, dtype=float)
    n = f.size
    if n < 3:
        raise ValueError("need at least 3 samples")
    d = np.empty_like(f)
    d[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * dx)
    d[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * dx)
    if n >= 5:
        d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * dx)
        d[1] = (f[2] - f[0]) / (2 * dx)
        d[-2] = (f[-1] - f[-3]) / (2 * dx)
    else:
        d[1:-1] = (f[2:] - f[:-2]) / (2 * dx)
    return d


@dataclass
class NormSeries:
    t: list = field(default_factory=list)
    sup_rho: list = field(default_factory=list)
    sup_v: list = field(default_factory=list)
    sup_rho_x: list = field(default_factory=list)
    sup_v_x: list = field(default_factory=list)
    min_S: list = field(default_factory=list)
    max_R: list = field(default_factory=list)
    sup_xi: list = field(default_factory=list)

    def append(self, row) -> None:
        for name, val in zip(NORM_COLUMNS, row):
            getattr(self, name).append(float(val))

    def as_arrays(self) -> dict[str, np.ndarray]:
        return {name: np.asarray(getattr(self, name)) for name in NORM_COLUMNS}

    def __len__(self):
        return len(self.t)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(NORM_COLUMNS)
            for row in zip(*(getattr(self, n) for n in NORM_COLUMNS)):
                w.writerow([repr(v) for v in row])

    @classmethod
    def read_csv(cls, path) -> "NormSeries":
        out = cls()
        with open(path, newline="") as fh:
            rows = csv.reader(fh)
            header = next(rows)
            if tuple(header) != NORM_COLUMNS:
                raise ValueError(f"{path}: unexpected header {header}")
            for row in rows:
                out.append([float(v) for v in row])
        return out


def norm_row(t, x, rho, v, S, R):
    """Monitored scalars of one time level, in :data:`NORM_COLUMNS` order."""
    dx = float(x[1] - x[0])
    return (t, np.max(np.abs(rho)), np.max(np.abs(v)),
            np.max(np.abs(ddx(rho, dx))), np.max(np.abs(ddx(v, dx))),
            np.min(S), np.max(R), np.max(R / S - 1.0))


def norm_series(snapshots) -> NormSeries:
    if not snapshots:
        raise ValueError("need at least one snapshot")
    out = NormSeries()
    for snap in snapshots:
        out.append(norm_row(snap.t, snap.x, snap.rho, snap.v, snap.S, snap.R))
    return out


@dataclass(frozen=True)
class ClaimReport:
    claim_id: str
    passed: bool
    worst_margin: float
    x: float = math.nan
    t: float = math.nan
    status: str = ""     # pass | fail | warn | n/a
    note: str = ""

    def __post_init__(self):
        if not self.status:
            object.__setattr__(self, "status", "pass" if self.passed else "fail")


def _claim(claim_id, margin, x, t, tol, note="", soft=False):
    """Margin arrays share a shape with ``x`` / ``t`` (broadcast); pass iff min >= -tol."""
    margin = np.asarray(margin, dtype=float)
    x = np.broadcast_to(np.asarray(x, dtype=float), margin.shape)
    t = np.broadcast_to(np.asarray(t, dtype=float), margin.shape)
    finite = np.isfinite(margin)
    if not finite.all():
        i = np.unravel_index(int(np.argmin(finite)), margin.shape)
        return ClaimReport(claim_id, False, -math.inf, float(x[i]), float(t[i]), "fail",
                           (note + " non-finite").strip())
    i = np.unravel_index(int(np.argmin(margin)), margin.shape)
    ok = bool(margin[i] >= -tol)
    status = "pass" if ok else ("warn" if soft else "fail")
    return ClaimReport(claim_id, ok or soft, float(margin[i]), float(x[i]), float(t[i]),
                       status, note)


def max_principle_check(snapshot, M: float, tol: float = 1e-8) -> ClaimReport:
    """``0 < S < R <= M`` at every node of one snapshot."""
    S, R = snapshot.S, snapshot.R
    margin = np.minimum(np.minimum(S, R - S), M + tol - R + tol)
    # R - S > 0 and S > 0 are strict: a zero margin there fails
    strict = np.minimum(S, R - S)
    m = np.where(strict <= 0, np.minimum(strict, -2 * tol - 1e-300), margin)
    return _claim("max-principle", m, snapshot.x, snapshot.t, tol)


def data_bound_M(initial, boundary, x_grid, t_grid) -> float:
    return float(max(np.max(initial.R0(np.asarray(x_grid))),
                     np.max(boundary.RB(np.asarray(t_grid)))))


def xi_bound_check(run, initial, boundary, x_grid, t_grid,
                   tol: float = 1e-8) -> ClaimReport:
    """``sup xi <= max(sup xi0, sup xiB) + tol`` over a run.

    ``run`` is a :class:`NormSeries` or a sequence of snapshots; snapshots
    also locate the worst point in ``x``.
    """
    env = float(max(np.max(initial.xi0(np.asarray(x_grid))),
                    np.max(boundary.xiB(np.asarray(t_grid)))))
    if isinstance(run, NormSeries):
        margins = env - np.asarray(run.sup_xi)
        where = [(math.nan, t) for t in run.t]
    else:
        margins = np.array([env - np.max(s.xi) for s in run])
        where = [(float(s.x[int(np.argmax(s.xi))]), s.t) for s in run]
    i = int(np.argmin(margins))
    return ClaimReport("xi-bound", bool(margins[i] >= -tol), float(margins[i]),
                       where[i][0], where[i][1], note=f"envelope {env:.6g}")


def xi_scaling_slope(nus, sup_xis) -> float:
    """Least-squares slope of ``log sup xi`` against ``log nu``."""
    return float(np.polyfit(np.log(np.asarray(nus)), np.log(np.asarray(sup_xis)), 1)[0])


def sup_v_nonincreasing(series: NormSeries, tol: float = 1e-6) -> ClaimReport:
    t = np.asarray(series.t)
    if t.size < 2:
        return ClaimReport("sup-v-nonincreasing", True, math.inf, status="n/a")
    return _claim("sup-v-nonincreasing", -np.diff(series.sup_v), math.nan, t[1:], tol)


def sup_rho_decreased(series: NormSeries) -> ClaimReport:
    """``sup rho`` at the final time strictly below its initial value."""
    margin = series.sup_rho[0] - series.sup_rho[-1]
    return ClaimReport("sup-rho-decreased", bool(margin > 0), float(margin), math.nan,
                       series.t[-1])


def norms_finite(series: NormSeries) -> ClaimReport:
    arr = np.array([series.sup_rho, series.sup_v, series.sup_rho_x, series.sup_v_x])
    bad = ~np.isfinite(arr)
    if bad.any():
        j = int(np.argmax(bad.any(axis=0)))
        return ClaimReport("norms-finite", False, -math.inf, math.nan, series.t[j])
    return ClaimReport("norms-finite", True, float(np.max(arr)), math.nan, math.nan)


def nu_convergence_ordering(final_v: dict) -> ClaimReport:
    """Distances between final ``v`` fields shrink along a decreasing ``nu`` sweep.

    ``final_v`` maps ``nu`` to the final velocity array on a shared grid.
    """
    nus = sorted(final_v, reverse=True)
    if len(nus) < 3:
        return ClaimReport("nu-convergence", True, math.nan, status="n/a",
                           note="needs three nu values")
    d = [float(np.max(np.abs(final_v[a] - final_v[b]))) for a, b in zip(nus, nus[1:])]
    margin = min(x - y for x, y in zip(d, d[1:]))
    return ClaimReport("nu-convergence", bool(margin > 0), margin,
                       note="successive distances " + ", ".join(f"{v:.3g}" for v in d))


def time_derivatives(snapshot, profile, params):
    """``(S_x, R_x, S_t, R_t)``; time derivatives come from the invariant equations."""
    S, R = snapshot.S, snapshot.R
    dx = float(snapshot.x[1] - snapshot.x[0])
    Sx, Rx = ddx(S, dx), ddx(R, dx)
    k = profile.k(snapshot.x)
    g = (params.gamma - 1.0) / 8.0 * k * (R * R - S * S)
    lam1, lam2 = eigenvalues(RiemannState(S, R), params)
    return Sx, Rx, g - lam1 * Sx, -g - lam2 * Rx


def slope_inequality_check(snapshot, profile, params, tol: float = 1e-6,
                           strict_nu: float = STRICT_NU) -> ClaimReport:
    """``kS/(-4b) <= min(S_x, R_x)`` and ``max(S_t, R_t) <= kS^2/(4b)`` pointwise.

    Above ``strict_nu`` a violation is reported as a warning only.
    """
    b = params.b
    S = snapshot.S
    k = profile.k(snapshot.x)
    Sx, Rx, St, Rt = time_derivatives(snapshot, profile, params)
    m_x = np.minimum(Sx, Rx) - k * S / (-4.0 * b)
    m_t = k * S * S / (4.0 * b) - np.maximum(St, Rt)
    return _claim("slope-ineq", np.minimum(m_x, m_t), snapshot.x, snapshot.t, tol,
                  soft=params.nu > strict_nu)


def decay_bound(S0_at_x, k_at_x, b, t):
    """Upper envelope ``(1/S0 - k t/(4b))**-1`` for ``S(x, t)``."""
    return 1.0 / (1.0 / S0_at_x - k_at_x * np.asarray(t, dtype=float) / (4.0 * b))


def probe_series(snapshots, x_probe, name="S"):
    """Time series of a field at ``x_probe`` (linear interpolation in x)."""
    t = np.array([s.t for s in snapshots])
    vals = np.array([np.interp(x_probe, s.x, getattr(s, name)) for s in snapshots])
    return t, vals


def decay_check(snapshots, initial, profile, params, probes, tol: float = 1e-6,
                fit_exponent: bool = True, soft: bool = False) -> list[ClaimReport]:
    """Decay envelope, ``R <= 2S`` and monotone decrease of ``S, R, v`` at each probe.

    The fitted exponent of ``S`` over the last half of the horizon is added as
    an informational entry (warn outside ``[-1.2, -0.8]``). ``soft`` turns
    failures into warnings.
    """
    out = []
    b = params.b
    for xp in probes:
        k = float(profile.k(xp))
        tag = f"@x={xp:g}"
        if k <= 0:
            out.append(ClaimReport("decay" + tag, True, math.nan, xp, math.nan, "n/a",
                                   "k = 0 at probe"))
            continue
        t, S = probe_series(snapshots, xp, "S")
        _, R = probe_series(snapshots, xp, "R")
        _, v = probe_series(snapshots, xp, "v")
        env = decay_bound(float(initial.S0(xp)), k, b, t)
        out.append(_claim("decay-bound" + tag, env - S, xp, t, tol, soft=soft))
        out.append(_claim("r-le-2s" + tag, 2.0 * S - R, xp, t, tol, soft=soft))
        mono = np.minimum.reduce([-np.diff(S), -np.diff(R), -np.diff(v)]) if t.size > 1 \
            else np.zeros(1)
        out.append(_claim("decreasing" + tag, mono, xp, t[1:] if t.size > 1 else t, tol,
                          soft=soft))
        if fit_exponent:
            half = t >= 0.5 * t[-1]
            if t[-1] > 0 and half.sum() >= 3 and t[half][0] > 0:
                slope = float(np.polyfit(np.log(t[half]), np.log(S[half]), 1)[0])
                ok = -1.2 <= slope <= -0.8
                out.append(ClaimReport("decay-rate" + tag, True, slope, xp, t[-1],
                                       "pass" if ok else "warn",
                                       f"fitted exponent {slope:.3f}; O(1/t) is asymptotic"))
    return out


def write_claims(path, claims) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CLAIM_COLUMNS)
        for c in claims:
            w.writerow([c.claim_id, c.status, repr(c.worst_margin), repr(c.x), repr(c.t)])


def read_claims(path) -> list[tuple]:
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    return [tuple(r) for r in rows[1:]]


def field_distance(snap_a, snap_b, name="v") -> float:
    """L-infinity distance of a field between two snapshots on the same grid."""
    return float(np.max(np.abs(getattr(snap_a, name) - getattr(snap_b, name))))
