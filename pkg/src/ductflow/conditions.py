"""Initial/boundary data and validators for the global-existence hypotheses.

Every check is grid sampled. A check returns a :class:`Verdict` (or a dict of
them keyed by claim id) whose ``margin`` is positive when the inequality holds
and whose ``witness`` is the sample with the smallest margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import geometry
from .errors import PreconditionError
from .model import GasParameters

PASS, FAIL, NA = "pass", "fail", "n/a"

CLAIM_ORDER = (
    "gamma-range", "A1", "k1", "k-tail", "A2", "A2-compat", "A3", "A4", "A5",
    "S0-ineq", "R0-ineq", "k2", "SB-ineq", "RB-ineq", "k3",
    "spherical-gamma", "initial2", "light-speed",
)


@dataclass(frozen=True)
class InitialData:
    """``S_0``, ``R_0`` and their x-derivatives on the duct domain."""

    S0: Callable
    R0: Callable
    dS0: Callable
    dR0: Callable
    x_b: float
    x_c: float

    def xi0(self, x):
        return np.asarray(self.R0(x)) / np.asarray(self.S0(x)) - 1.0


@dataclass(frozen=True)
class BoundaryData:
    """``S_B``, ``R_B`` and their t-derivatives at the inflow end, for ``t >= 0``."""

    SB: Callable
    RB: Callable
    dSB: Callable
    dRB: Callable

    def xiB(self, t):
        return np.asarray(self.RB(t)) / np.asarray(self.SB(t)) - 1.0


@dataclass(frozen=True)
class Verdict:
    status: str
    margin: float = math.nan
    witness: float | None = None
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def failed(self) -> bool:
        return self.status == FAIL


def _verdict(margin, points, tol=0.0, note=""):
    """Pass iff ``min(margin) >= -tol``; witness is the arg-min sample."""
    margin = np.atleast_1d(np.asarray(margin, dtype=float))
    points = np.atleast_1d(np.asarray(points, dtype=float))
    if margin.size == 0:
        raise PreconditionError("empty sample grid")
    if points.size == 1 and margin.size > 1:
        points = np.full(margin.shape, points[0])
    bad = ~np.isfinite(margin)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        return Verdict(FAIL, -math.inf, float(points[i]), (note + " non-finite value").strip())
    i = int(np.argmin(margin))
    status = PASS if margin[i] >= -tol else FAIL
    return Verdict(status, float(margin[i]), float(points[i]), note)


def check_gamma_range(gamma: float) -> Verdict:
    ok = math.isfinite(gamma) and 1.0 < gamma < 3.0
    margin = min(gamma - 1.0, 3.0 - gamma) if math.isfinite(gamma) else -math.inf
    return Verdict(PASS if ok else FAIL, margin, gamma, "" if ok else "gamma must lie in (1, 3)")


def check_a1(profile, grid, c1_max: float = math.inf) -> Verdict:
    """``k >= 0`` on the grid and a finite (optionally bounded) C^1 norm."""
    grid = np.asarray(grid, dtype=float)
    k = np.atleast_1d(profile.k(grid))
    norm = geometry.c1_norm(profile, grid)
    note = f"C1 norm {norm:.6g}"
    if not math.isfinite(norm) or norm > c1_max:
        i = int(np.argmax(np.abs(profile.dk(grid))))
        return Verdict(FAIL, c1_max - norm, float(grid[i]), note + f" exceeds {c1_max:g}")
    return _verdict(k, grid, note=note)


def check_compatibility(initial: InitialData, boundary: BoundaryData, profile,
                        params: GasParameters, tol: float = 1e-10) -> dict[str, Verdict]:
    """Corner matching at ``(x_b, 0)``: values (``A2``) and the two ODE relations (``A2-compat``)."""
    g = params.gamma
    xb = profile.x_b
    s0, r0 = float(initial.S0(xb)), float(initial.R0(xb))
    sb, rb = float(boundary.SB(0.0)), float(boundary.RB(0.0))
    value_res = max(abs(s0 - sb), abs(r0 - rb))
    src = (g - 1.0) / 8.0 * profile.k(xb) * (r0 * r0 - s0 * s0)
    lam1 = 0.25 * (g + 1.0) * s0 + 0.25 * (3.0 - g) * r0
    lam2 = 0.25 * (3.0 - g) * s0 + 0.25 * (g + 1.0) * r0
    res_s = float(boundary.dSB(0.0)) + lam1 * float(initial.dS0(xb)) - src
    res_r = float(boundary.dRB(0.0)) + lam2 * float(initial.dR0(xb)) + src
    ode_res = max(abs(res_s), abs(res_r))
    return {
        "A2": Verdict(PASS if value_res <= tol else FAIL, tol - value_res, xb,
                      f"corner value residual {value_res:.3g}"),
        "A2-compat": Verdict(PASS if ode_res <= tol else FAIL, tol - ode_res, xb,
                             f"corner ODE residuals S {res_s:.3g}, R {res_r:.3g}"),
    }


def check_a3(initial: InitialData, grid) -> Verdict:
    """``0 < S_0 < R_0`` with finite C^1 samples."""
    grid = np.asarray(grid, dtype=float)
    s, r = np.atleast_1d(initial.S0(grid)), np.atleast_1d(initial.R0(grid))
    ds, dr = np.atleast_1d(initial.dS0(grid)), np.atleast_1d(initial.dR0(grid))
    margin = np.minimum(s, r - s)
    margin = np.where(np.isfinite(ds + dr), margin, np.nan)
    return _verdict(margin, grid, note="min(S0, R0 - S0)")


def check_a4(boundary: BoundaryData, times) -> Verdict:
    """``0 < S_B < R_B`` with finite C^1 samples on the sampled horizon."""
    times = np.asarray(times, dtype=float)
    s, r = np.atleast_1d(boundary.SB(times)), np.atleast_1d(boundary.RB(times))
    ds, dr = np.atleast_1d(boundary.dSB(times)), np.atleast_1d(boundary.dRB(times))
    margin = np.where(np.isfinite(ds + dr), np.minimum(s, r - s), np.nan)
    return _verdict(margin, times, note=f"min(SB, RB - SB) on t <= {times.max():g}")


def check_a5_smallness(initial: InitialData, boundary: BoundaryData, params: GasParameters,
                       c_xi: float, x_grid, t_grid) -> Verdict:
    """Monotone data and ``sup xi <= c_xi sqrt(nu)`` for both data sets.

    ``xi_B`` is checked on the sampled horizon only; uniformity in time beyond
    it is not established (the verdict note says so).
    """
    if not c_xi > 0:
        raise PreconditionError("c_xi must be positive")
    x_grid = np.asarray(x_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    bound = c_xi * math.sqrt(params.nu)
    parts = [
        (np.atleast_1d(initial.dS0(x_grid)), x_grid),
        (np.atleast_1d(initial.dR0(x_grid)), x_grid),
        (-np.atleast_1d(boundary.dSB(t_grid)), t_grid),
        (-np.atleast_1d(boundary.dRB(t_grid)), t_grid),
        (bound - np.atleast_1d(initial.xi0(x_grid)), x_grid),
        (bound - np.atleast_1d(boundary.xiB(t_grid)), t_grid),
    ]
    labels = ["S0'", "R0'", "-SB'", "-RB'", "xi0 bound", "xiB bound"]
    worst = None
    for (m, pts), label in zip(parts, labels):
        v = _verdict(m, pts, note=label)
        if worst is None or (v.margin < worst.margin):
            worst = v
    note = (f"worst: {worst.note}; sup xi0 {np.max(initial.xi0(x_grid)):.4g}, "
            f"sup xiB {np.max(boundary.xiB(t_grid)):.4g}, bound {bound:.4g}; "
            f"xiB sampled on t <= {t_grid.max():g} only")
    return Verdict(worst.status, worst.margin, worst.witness, note)


def initial_slope_bounds(S0, xi0, k, params: GasParameters):
    """Lower bounds on ``(S_0', R_0')`` equivalent to ``Y(0) >= 0`` and ``Z(0) >= 0``."""
    b = params.b
    half = 0.5 * k * S0
    if params.log_branch:
        # eps0 = ln(S0 xi0) lives only in this branch
        eps0 = np.log(S0 * xi0)
        return half * (1.0 - eps0 * xi0), half * (1.0 + xi0 + eps0 * xi0)
    return (half * (1.0 / -b - xi0 / (b + 1.0)),
            half * (1.0 / -b - xi0 / (b * (b + 1.0))))


def boundary_slope_bounds(SB, xiB, kB, params: GasParameters):
    """Upper bounds on ``(S_B', R_B')`` equivalent to ``Y(t_B) >= 0`` and ``Z(t_B) >= 0``."""
    b = params.b
    half = 0.5 * kB * SB * SB
    if params.log_branch:
        epsB = np.log(SB * xiB)
        return (half * (-1.0 + epsB * xiB + (2.0 * epsB + 1.0) / 6.0 * xiB**2),
                half * (-1.0 - (epsB + 2.0) * xiB - (4.0 * epsB + 5.0) / 6.0 * xiB**2))
    q = 2.0 * (b + 1.0) * (1.0 - 2.0 * b)
    return (half * (1.0 / b + xiB / (b + 1.0) + (1.0 - b) / q * xiB**2),
            half * (1.0 / b + (b + 2.0) / (b * (b + 1.0)) * xiB
                    - (b * b + 3.0 * b - 2.0) / (b * q) * xiB**2))


def check_initial_slopes(initial: InitialData, profile, params: GasParameters,
                         grid) -> dict[str, Verdict]:
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise PreconditionError("empty sample grid")
    S0 = np.atleast_1d(initial.S0(grid))
    if np.any(S0 <= 0):
        i = int(np.flatnonzero(S0 <= 0)[0])
        raise PreconditionError("S0 must be positive", witness=float(grid[i]))
    R0 = np.atleast_1d(initial.R0(grid))
    dS0, dR0 = np.atleast_1d(initial.dS0(grid)), np.atleast_1d(initial.dR0(grid))
    k = np.atleast_1d(profile.k(grid))
    lo_s, lo_r = initial_slope_bounds(S0, R0 / S0 - 1.0, k, params)
    b = params.b
    k2 = np.minimum(dS0 - k * S0 / -b, dR0 - k * R0 / -b)
    return {
        "S0-ineq": _verdict(dS0 - lo_s, grid),
        "R0-ineq": _verdict(dR0 - lo_r, grid),
        "k2": _verdict(k2, grid),
    }


def check_boundary_slopes(boundary: BoundaryData, profile, params: GasParameters,
                          times) -> dict[str, Verdict]:
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise PreconditionError("empty sample grid")
    SB = np.atleast_1d(boundary.SB(times))
    if np.any(SB <= 0):
        i = int(np.flatnonzero(SB <= 0)[0])
        raise PreconditionError("SB must be positive", witness=float(times[i]))
    RB = np.atleast_1d(boundary.RB(times))
    dSB, dRB = np.atleast_1d(boundary.dSB(times)), np.atleast_1d(boundary.dRB(times))
    kB = float(profile.k(profile.x_b))
    hi_s, hi_r = boundary_slope_bounds(SB, RB / SB - 1.0, kB, params)
    b = params.b
    k3 = np.minimum(kB * SB**2 / b - dSB, kB * RB**2 / b - dRB)
    return {
        "SB-ineq": _verdict(hi_s - dSB, times),
        "RB-ineq": _verdict(hi_r - dRB, times),
        "k3": _verdict(k3, times),
    }


def check_spherical(x_b: float, x_c: float, n_dim: int, params: GasParameters,
                    initial: InitialData, c_light: float = math.inf,
                    grid=None) -> dict[str, Verdict]:
    """Extra hypotheses for radially symmetric flow with ``k = (N-1)/x``."""
    if n_dim < 2 or not x_b > 0:
        raise PreconditionError("spherical check needs N >= 2 and x_b > 0")
    g_max = 1.0 + 2.0 / n_dim
    out = {"spherical-gamma": Verdict(PASS if params.gamma < g_max else FAIL,
                                      g_max - params.gamma, params.gamma,
                                      f"needs gamma < {g_max:.6g}")}
    if math.isinf(x_c):
        out["initial2"] = Verdict(NA, note="infinite domain")
        out["light-speed"] = Verdict(NA, note="infinite domain")
        return out
    if grid is None:
        grid = np.linspace(x_b, x_c, 1001)
    grid = np.asarray(grid, dtype=float)
    b = params.b
    m = n_dim - 1.0
    growth = x_b ** (m / b) * grid ** (m / -b)
    margin = np.minimum(initial.S0(grid) - initial.S0(x_b) * growth,
                        initial.R0(grid) - initial.R0(x_b) * growth)
    out["initial2"] = _verdict(margin, grid)
    rc = float(initial.R0(x_c))
    out["light-speed"] = Verdict(PASS if rc < c_light else FAIL, c_light - rc, x_c,
                                 f"R0(x_C) = {rc:.6g}")
    return out


@dataclass
class ValidationReport:
    verdicts: dict[str, Verdict] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.status != FAIL for v in self.verdicts.values())

    @property
    def failed_ids(self) -> list[str]:
        return [cid for cid, v in self.verdicts.items() if v.failed]

    def ordered(self):
        known = [c for c in CLAIM_ORDER if c in self.verdicts]
        extra = [c for c in self.verdicts if c not in CLAIM_ORDER]
        return [(c, self.verdicts[c]) for c in known + extra]

    def to_text(self) -> str:
        lines = []
        for cid, v in self.ordered():
            where = "" if v.witness is None else f" at {v.witness:.6g}"
            lines.append(f"{cid:16s} {v.status.upper():5s} margin {v.margin: .4e}{where}"
                         + (f"  ({v.note})" if v.note else ""))
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)

    def to_kv(self) -> str:
        lines = []
        for cid, v in self.ordered():
            w = "" if v.witness is None else repr(v.witness)
            lines.append(f"{cid}.status={v.status}")
            lines.append(f"{cid}.margin={v.margin!r}")
            lines.append(f"{cid}.witness={w}")
        lines.append(f"overall={'pass' if self.passed else 'fail'}")
        return "\n".join(lines)


def validate(profile, params: GasParameters, initial: InitialData, boundary: BoundaryData,
             *, x_grid, t_grid, c_xi: float = 2.0, delta: float | None = None,
             c1_max: float = math.inf, compat_tol: float = 1e-10,
             c_light: float = math.inf) -> ValidationReport:
    """Run every applicable check and collect the verdicts."""
    x_grid = np.asarray(x_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    rep = ValidationReport()
    v = rep.verdicts
    v["gamma-range"] = check_gamma_range(params.gamma)
    v["A1"] = check_a1(profile, x_grid, c1_max)
    b = params.b
    if delta is None:
        found = geometry.search_k1_delta(profile, x_grid, b)
        if found:
            best = geometry.check_k1(profile, found[0], x_grid, b)
            v["k1"] = Verdict(PASS, best.worst_margin, None,
                              f"holds for delta in [{found[0]:.3g}, {found[-1]:.3g}]")
        else:
            res = geometry.check_k1(profile, 0.01, x_grid, b)
            v["k1"] = Verdict(FAIL, res.worst_margin, res.x, "no delta in (0, 2) works")
    else:
        res = geometry.check_k1(profile, delta, x_grid, b)
        v["k1"] = Verdict(PASS if res.passed else FAIL, res.worst_margin, res.x,
                          f"delta = {delta:g}")
    tail = geometry.check_k_integrability(profile)
    v["k-tail"] = Verdict(NA if not tail.applicable else (PASS if tail.passed else FAIL),
                          note=tail.note or f"int k = {tail.integral:.6g}")
    v.update(check_compatibility(initial, boundary, profile, params, compat_tol))
    v["A3"] = check_a3(initial, x_grid)
    v["A4"] = check_a4(boundary, t_grid)
    v["A5"] = check_a5_smallness(initial, boundary, params, c_xi, x_grid, t_grid)
    if v["A3"].passed:
        v.update(check_initial_slopes(initial, profile, params, x_grid))
    else:
        for cid in ("S0-ineq", "R0-ineq", "k2"):
            v[cid] = Verdict(NA, note="A3 failed")
    if v["A4"].passed:
        v.update(check_boundary_slopes(boundary, profile, params, t_grid))
    else:
        for cid in ("SB-ineq", "RB-ineq", "k3"):
            v[cid] = Verdict(NA, note="A4 failed")
    if profile.name == "spherical":
        v.update(check_spherical(profile.x_b, profile.x_c, profile.params["N"], params,
                                 initial, c_light, x_grid))
    return rep


def nu_threshold(passes: Callable[[float], bool], nu_lo: float, nu_hi: float,
                 iters: int = 50) -> float:
    """Largest ``nu`` in ``[nu_lo, nu_hi]`` with ``passes(nu)``, by bisection in ``log nu``.

    Assumes a single pass-to-fail transition; ``passes(nu_lo)`` must hold.
    Returns ``nu_hi`` when even that passes.
    """
    if not passes(nu_lo):
        raise PreconditionError("check fails already at nu_lo", witness=nu_lo)
    if passes(nu_hi):
        return nu_hi
    lo, hi = math.log(nu_lo), math.log(nu_hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if passes(math.exp(mid)):
            lo = mid
        else:
            hi = mid
    return math.exp(lo)
