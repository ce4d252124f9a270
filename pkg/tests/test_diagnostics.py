import math
from types import SimpleNamespace

import numpy as np
import pytest

from ductflow import GasParameters, geometry, presets
from ductflow import diagnostics as diag

AIR = GasParameters(1.4, 1e-4)
X = np.linspace(1.0, 10.0, 91)


def snap(S, R, t=0.0, x=X):
    S = np.broadcast_to(np.asarray(S, float), x.shape)
    R = np.broadcast_to(np.asarray(R, float), x.shape)
    with np.errstate(divide="ignore"):
        xi = R / S - 1.0
    return SimpleNamespace(x=x, t=t, S=S, R=R, v=0.5 * (S + R), xi=xi)


def test_ddx_order():
    errs = []
    for n in (41, 81, 161):
        x = np.linspace(0.0, 2.0, n)
        errs.append(np.max(np.abs(diag.ddx(np.sin(x), x[1] - x[0])[2:-2] - np.cos(x[2:-2]))))
    assert math.log2(errs[0] / errs[1]) >= 3.9 and math.log2(errs[1] / errs[2]) >= 3.9


def test_norm_row_sin_density():
    x = np.linspace(0.0, 2 * np.pi, 2001)
    rho = 2.0 + np.sin(x)
    row = diag.norm_row(0.0, x, rho, np.zeros_like(x), np.ones_like(x), 1.1 * np.ones_like(x))
    # second-order edge stencils dominate: O(h^2) ~ 1e-5
    assert row[3] == pytest.approx(1.0, abs=1e-5)
    assert row[1] == pytest.approx(3.0, abs=1e-6)
    assert row[-1] == pytest.approx(0.1, abs=1e-12)


def test_max_principle():
    assert diag.max_principle_check(snap(0.5, 0.9), 1.0).passed
    over = diag.max_principle_check(snap(0.5, 1.1), 1.0)
    assert not over.passed and over.worst_margin < 0
    assert not diag.max_principle_check(snap(0.0, 0.5), 1.0).passed
    assert not diag.max_principle_check(snap(0.5, 0.5), 1.0).passed
    S = np.full(X.shape, 0.5)
    S[40] = 0.95
    bad = diag.max_principle_check(snap(S, 0.9), 1.0)
    assert bad.status == "fail" and bad.x == pytest.approx(X[40])


def test_decay_bound_values():
    assert diag.decay_bound(1.0, 1.0, -2.0, 8.0) == pytest.approx(0.5, abs=1e-15)
    assert diag.decay_bound(0.7, 0.0, -2.0, 5.0) == pytest.approx(0.7)


def test_decay_check_without_source():
    profile = geometry.straight(1.0, 10.0)
    gas = GasParameters(1.4, 0.1)
    _, _, initial, _ = presets.experiment("experiment1", 0.1)
    reps = diag.decay_check([snap(0.5, 0.9)], initial, profile, gas, (2.0,))
    assert len(reps) == 1 and reps[0].status == "n/a"


def test_decay_check_on_exact_envelope():
    profile = geometry.exp1(1.0, 10.0)
    gas = GasParameters(1.4, 0.1)
    _, _, initial, _ = presets.experiment("experiment1", 0.1)
    xp = 2.0
    ts = np.linspace(0.0, 10.0, 51)
    S0, k = float(initial.S0(xp)), float(profile.k(xp))
    env = diag.decay_bound(S0, k, gas.b, ts)
    snaps = [snap(0.99 * e, 1.5 * 0.99 * e, t) for e, t in zip(env, ts)]
    reps = {r.claim_id: r for r in diag.decay_check(snaps, initial, profile, gas, (xp,))}
    assert reps["decay-bound@x=2"].passed
    assert reps["r-le-2s@x=2"].passed and reps["decreasing@x=2"].passed
    rising = [snap(1.01 * e, 1.5 * e, t) for e, t in zip(env, ts)]
    reps = {r.claim_id: r for r in diag.decay_check(rising, initial, profile, gas, (xp,))}
    assert reps["decay-bound@x=2"].status == "fail"


def test_slope_check_negative_gradient_fails():
    profile = geometry.exp1(1.0, 10.0)
    S = 0.8 - 0.01 * X
    rep = diag.slope_inequality_check(snap(S, S + 0.01), profile, AIR)
    assert rep.status == "fail"
    soft = diag.slope_inequality_check(snap(S, S + 0.01), profile, GasParameters(1.4, 0.1))
    assert soft.status == "warn" and soft.passed


def test_slope_check_no_source_is_trivial():
    rep = diag.slope_inequality_check(snap(0.5, 0.51), geometry.straight(1.0, 10.0), AIR)
    assert rep.passed and rep.worst_margin == pytest.approx(0.0, abs=1e-14)


def test_xi_bound_and_scaling():
    _, _, initial, boundary = presets.experiment("experiment1", 0.1)
    T = np.linspace(0.0, 10.0, 101)
    env = float(boundary.xiB(0.0))
    ok = diag.xi_bound_check([snap(1.0, 1.0 + 0.5 * env)], initial, boundary, X, T)
    assert ok.passed
    bad = diag.xi_bound_check([snap(1.0, 1.0 + 2.0 * env)], initial, boundary, X, T)
    assert not bad.passed
    nus = np.array([0.1, 1e-3, 1e-5])
    assert diag.xi_scaling_slope(nus, 3.0 * np.sqrt(nus)) == pytest.approx(0.5, abs=1e-12)


def test_series_claims():
    s = diag.NormSeries()
    for t, r, v in ((0.0, 2.0, 1.0), (1.0, 1.5, 0.9), (2.0, 1.0, 0.9)):
        s.append((t, r, v, 0.1, 0.1, 0.5, 1.0, 0.2))
    assert diag.sup_v_nonincreasing(s).passed
    assert diag.sup_rho_decreased(s).passed
    assert diag.norms_finite(s).passed
    s.append((3.0, math.nan, 1.0, 0.1, 0.1, 0.5, 1.0, 0.2))
    assert not diag.norms_finite(s).passed
    assert not diag.sup_v_nonincreasing(s).passed


def test_nu_convergence_ordering():
    base = np.zeros(5)
    good = {0.1: base + 1.0, 1e-3: base + 0.1, 1e-5: base + 0.09}
    assert diag.nu_convergence_ordering(good).passed
    bad = {0.1: base + 1.0, 1e-3: base + 0.9, 1e-5: base}
    assert not diag.nu_convergence_ordering(bad).passed
    assert diag.nu_convergence_ordering({0.1: base, 1e-3: base}).status == "n/a"


def test_claims_csv_roundtrip(tmp_path):
    claims = [diag.ClaimReport("a", True, 0.5, 1.0, 2.0),
              diag.ClaimReport("b", False, -1.0, 3.0, 4.0)]
    path = tmp_path / "claims.csv"
    diag.write_claims(path, claims)
    assert path.read_text().splitlines()[0] == ",".join(diag.CLAIM_COLUMNS)
    rows = diag.read_claims(path)
    assert rows[0][:2] == ("a", "pass") and rows[1][:2] == ("b", "fail")
    assert float(rows[1][2]) == -1.0


def test_norm_series_csv_roundtrip(tmp_path):
    s = diag.NormSeries()
    s.append((0.0, 1.0, 2.0, 3.0, 4.0, 0.5, 0.9, 0.8))
    path = tmp_path / "diagnostics.csv"
    s.write_csv(path)
    back = diag.NormSeries.read_csv(path)
    assert back.as_arrays()["sup_xi"][0] == 0.8 and len(back) == 1
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        diag.NormSeries.read_csv(path)
