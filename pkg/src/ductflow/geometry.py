"""Duct cross-sections ``a(x)``, their log-derivative ``k = a'/a`` and shape checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import minimize_scalar

from .errors import DomainError, PreconditionError

TABLE_HEADER = "# duct-profile v1"

# relative slack on the domain ends, so grid nodes built by x_b + j*dx are accepted
_EDGE_SLACK = 1e-9


@dataclass(frozen=True)
class DuctProfile:
    """Cross-section on ``[x_b, x_c]`` (``x_c`` may be ``inf``).

    Holds four vectorized evaluators. Use the preset constructors or
    :func:`from_area` / :func:`from_table` rather than building one by hand.
    """

    x_b: float
    x_c: float
    area: Callable = field(repr=False)
    darea: Callable = field(repr=False)
    k_fn: Callable = field(repr=False)
    dk_fn: Callable = field(repr=False)
    name: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not (self.x_c > self.x_b):
            raise DomainError(f"empty duct domain [{self.x_b}, {self.x_c}]")

    @property
    def half_line(self) -> bool:
        return math.isinf(self.x_c)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        scale = max(1.0, abs(self.x_b), 0.0 if self.half_line else abs(self.x_c))
        slack = _EDGE_SLACK * scale
        if np.any(x < self.x_b - slack) or np.any(x > self.x_c + slack) or np.any(np.isnan(x)):
            raise DomainError(f"x outside duct domain [{self.x_b}, {self.x_c}]")
        hi = self.x_c if not self.half_line else np.inf
        return np.clip(x, self.x_b, hi)

    def a(self, x):
        return _out(self.area(self._check(x)))

    def da(self, x):
        return _out(self.darea(self._check(x)))

    def k(self, x):
        return _out(self.k_fn(self._check(x)))

    def dk(self, x):
        return _out(self.dk_fn(self._check(x)))

    def evaluate(self, x):
        """Return ``(a, a', k, k')`` at ``x``."""
        return self.a(x), self.da(x), self.k(x), self.dk(x)


def _out(a):
    a = np.asarray(a, dtype=float)
    return a.item() if a.ndim == 0 else a


def exp1(x_b: float = 1.0, x_c: float = math.inf) -> DuctProfile:
    """``a = 2 - 1/x``, ``k = 1/(2x^2 - x)``."""
    _positive_start(x_b)
    return DuctProfile(
        x_b, x_c,
        area=lambda x: 2.0 - 1.0 / x,
        darea=lambda x: 1.0 / x**2,
        k_fn=lambda x: 1.0 / (2.0 * x**2 - x),
        dk_fn=lambda x: -(4.0 * x - 1.0) / (2.0 * x**2 - x) ** 2,
        name="exp1",
    )


def exp2(x_b: float = 1.0, x_c: float = math.inf) -> DuctProfile:
    """``a = exp(1 - 1/x)``, ``k = 1/x^2``."""
    _positive_start(x_b)
    return DuctProfile(
        x_b, x_c,
        area=lambda x: np.exp(1.0 - 1.0 / x),
        darea=lambda x: np.exp(1.0 - 1.0 / x) / x**2,
        k_fn=lambda x: 1.0 / x**2,
        dk_fn=lambda x: -2.0 / x**3,
        name="exp2",
    )


def spherical(n_dim: int, x_b: float, x_c: float = math.inf) -> DuctProfile:
    """Radially symmetric flow in ``n_dim`` dimensions: ``a = x**(N-1)``."""
    if int(n_dim) != n_dim or n_dim < 2:
        raise DomainError(f"spherical profile needs integer N >= 2, got {n_dim!r}")
    _positive_start(x_b)
    m = float(n_dim - 1)
    return DuctProfile(
        x_b, x_c,
        area=lambda x: x**m,
        darea=lambda x: m * x ** (m - 1.0),
        k_fn=lambda x: m / x,
        dk_fn=lambda x: -m / x**2,
        name="spherical",
        params={"N": int(n_dim)},
    )


def straight(x_b: float, x_c: float = math.inf) -> DuctProfile:
    """Constant cross-section; ``k = 0`` everywhere."""
    return DuctProfile(
        x_b, x_c,
        area=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        darea=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        k_fn=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        dk_fn=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        name="straight",
    )


def _positive_start(x_b):
    if not x_b > 0:
        raise DomainError(f"preset profiles need x_b > 0, got {x_b!r}")


def from_area(area: Callable, x_b: float, x_c: float, step: float = 1e-4,
              name: str = "custom") -> DuctProfile:
    """Profile from ``a(x)`` alone; derivatives by central differences of width ``step``.

    Near ``x_b`` (and a finite ``x_c``) the stencil is shifted to stay inside
    the domain, which keeps the scheme second order.
    """

    def shifted(x):
        x = np.asarray(x, dtype=float)
        lo = x_b + 2 * step
        hi = x_c - 2 * step if math.isfinite(x_c) else np.inf
        return np.clip(x, lo, max(lo, hi)) if hi > lo else x

    def d1(f):
        def df(x):
            x = np.asarray(x, dtype=float)
            c = shifted(x)
            # second-order Taylor shift from the stencil centre back to x
            fp = (f(c + step) - f(c - step)) / (2 * step)
            fpp = (f(c + step) - 2 * f(c) + f(c - step)) / step**2
            return fp + fpp * (x - c)
        return df

    darea = d1(area)

    def k_fn(x):
        return darea(x) / area(x)

    return DuctProfile(x_b, x_c, area=area, darea=darea, k_fn=k_fn, dk_fn=d1(k_fn),
                       name=name, params={"step": step})


def from_table(x, a, name: str = "table") -> DuctProfile:
    """C^1 monotone cubic (PCHIP) interpolant through ``(x, a)`` samples."""
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    if x.ndim != 1 or x.shape != a.shape or x.size < 2:
        raise DomainError("profile table needs two equal-length columns with >= 2 rows")
    if np.any(np.diff(x) <= 0):
        raise DomainError("profile table x column must be strictly increasing")
    if np.any(a <= 0):
        raise DomainError("cross-section must be positive")
    p = PchipInterpolator(x, a)
    p1 = p.derivative()
    p2 = p1.derivative()

    def k_fn(xx):
        return p1(xx) / p(xx)

    def dk_fn(xx):
        av = p(xx)
        return (p2(xx) * av - p1(xx) ** 2) / av**2

    return DuctProfile(float(x[0]), float(x[-1]), area=p, darea=p1, k_fn=k_fn, dk_fn=dk_fn,
                       name=name)


def read_table(path) -> DuctProfile:
    text = Path(path).read_text().splitlines()
    if not text or text[0].strip() != TABLE_HEADER:
        raise DomainError(f"{path}: first line must be {TABLE_HEADER!r}")
    rows = [ln.replace(",", " ").split() for ln in text[1:]
            if ln.strip() and not ln.lstrip().startswith("#")]
    try:
        data = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise DomainError(f"{path}: non-numeric entry ({exc})") from None
    if data.ndim != 2 or data.shape[1] != 2:
        raise DomainError(f"{path}: expected two columns (x, a)")
    return from_table(data[:, 0], data[:, 1], name=str(path))


def write_table(path, x, a) -> None:
    lines = [TABLE_HEADER] + [f"{xi!r} {ai!r}" for xi, ai in zip(map(float, x), map(float, a))]
    Path(path).write_text("\n".join(lines) + "\n")


def c1_norm(profile: DuctProfile, grid) -> float:
    """Sampled ``sup |k| + sup |k'|``."""
    grid = np.asarray(grid, dtype=float)
    return float(np.max(np.abs(profile.k(grid))) + np.max(np.abs(profile.dk(grid))))


@dataclass(frozen=True)
class K1Verdict:
    passed: bool
    delta: float
    x: float | None = None     # first violating point, if any
    lhs: float | None = None   # k'(x)
    rhs: float | None = None   # k(x)**2 / ((2 - delta) b)
    worst_margin: float = math.inf


def _k1_margin(profile, delta, b, x):
    k = profile.k(x)
    return k * k / ((2.0 - delta) * b) - profile.dk(x)


def check_k1(profile: DuctProfile, delta: float, grid, b: float) -> K1Verdict:
    """Sampled test of ``k' <= k^2 / ((2 - delta) b)``.

    The worst grid sample is refined by a bounded scalar search over its two
    neighbouring intervals, so violations between grid points are caught too.
    """
    if not 0.0 < delta < 2.0:
        raise PreconditionError(f"delta must lie in (0, 2), got {delta!r}")
    if not b < 0:
        raise PreconditionError(f"b must be negative, got {b!r}")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise PreconditionError("empty sample grid")
    grid = np.sort(grid)
    margin = np.atleast_1d(_k1_margin(profile, delta, b, grid))
    bad = np.flatnonzero(margin < 0)
    if bad.size:
        x = float(grid[bad[0]])
        return K1Verdict(False, delta, x, float(profile.dk(x)),
                         float(profile.k(x) ** 2 / ((2.0 - delta) * b)), float(margin.min()))
    worst = int(np.argmin(margin))
    lo = grid[max(worst - 1, 0)]
    hi = grid[min(worst + 1, grid.size - 1)]
    best_x, best_m = float(grid[worst]), float(margin[worst])
    if hi > lo:
        res = minimize_scalar(lambda s: _k1_margin(profile, delta, b, s), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-10 * max(1.0, abs(hi))})
        if res.fun < best_m:
            best_x, best_m = float(res.x), float(res.fun)
    if best_m < 0:
        return K1Verdict(False, delta, best_x, float(profile.dk(best_x)),
                         float(profile.k(best_x) ** 2 / ((2.0 - delta) * b)), best_m)
    return K1Verdict(True, delta, worst_margin=best_m)


def search_k1_delta(profile: DuctProfile, grid, b: float, deltas=None) -> list[float]:
    """All ``delta`` from a grid on (0, 2) for which :func:`check_k1` passes."""
    if deltas is None:
        deltas = np.linspace(0.01, 1.99, 199)
    return [float(d) for d in deltas if check_k1(profile, float(d), grid, b).passed]


@dataclass(frozen=True)
class IntegrabilityVerdict:
    passed: bool
    applicable: bool
    k_limit: float = 0.0
    integral: float = 0.0
    note: str = ""


def check_k_integrability(profile: DuctProfile, tol: float = 1e-6) -> IntegrabilityVerdict:
    """Tail behaviour required on a half-line: ``k -> 0`` and finite ``int k``.

    Uses ``int_{x_b}^X k = ln(a(X)/a(x_b))`` at ``X = x_b + 10**m``; the
    integral counts as convergent when the last decade adds at most ``tol``.
    """
    if not profile.half_line:
        return IntegrabilityVerdict(True, False, note="finite domain")
    xs = profile.x_b + 10.0 ** np.arange(1, 9)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        a_b = profile.a(profile.x_b)
        ints = np.log(np.asarray(profile.a(xs), dtype=float) / a_b)
        k_tail = float(np.abs(profile.k(xs[-1])))
    if not np.all(np.isfinite(ints)):
        return IntegrabilityVerdict(False, True, k_tail, math.inf, "area grows without bound")
    last_step = abs(ints[-1] - ints[-2])
    ok = k_tail <= tol and last_step <= tol * max(1.0, abs(ints[-1]))
    note = "" if ok else f"tail increment {last_step:.3g}, k(X) {k_tail:.3g}"
    return IntegrabilityVerdict(bool(ok), True, k_tail, float(ints[-1]), note)
