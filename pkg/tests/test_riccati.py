import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from ductflow import DomainError, GasParameters, PreconditionError, riccati

AIR = GasParameters(1.4, 0.1)


def test_offsets_hand_values():
    lq = riccati.lax_quantities(0.9, 1.0, 0.275, 0.2, 1.0, AIR)
    assert lq.h == pytest.approx(math.log(100.0), abs=1e-12)
    assert lq.Q1 == pytest.approx(-27.5, abs=1e-12)
    assert lq.Q2 == pytest.approx(-20.0, abs=1e-12)
    # S_x = 0.275 is exactly where Y vanishes
    assert abs(lq.Y) <= 1e-12 and abs(lq.Z) <= 1e-12


def test_offsets_vanish_without_source():
    for gas in (AIR, GasParameters(5 / 3, 0.1)):
        h, q1, q2 = riccati.offsets(0.3, 0.7, 0.0, gas)
        assert q1 == 0.0 and q2 == 0.0
        assert h == pytest.approx(gas.b * math.log(0.4), abs=1e-15)


def test_gradients_roundtrip():
    rng = np.random.default_rng(3)
    for gas in (AIR, GasParameters(5 / 3, 0.1), GasParameters(2.0, 0.1)):
        S = rng.uniform(0.1, 1.0, 50)
        R = S + rng.uniform(0.01, 1.0, 50)
        Sx, Rx, k = rng.normal(size=(3, 50))
        back = riccati.lax_quantities(S, R, Sx, Rx, k, gas).gradients()
        assert np.allclose(back[0], Sx, rtol=1e-10, atol=1e-12)
        assert np.allclose(back[1], Rx, rtol=1e-10, atol=1e-12)


def test_offsets_need_gap():
    with pytest.raises(DomainError):
        riccati.offsets(1.0, 1.0, 1.0, AIR)


def test_family_selection():
    co = riccati.riccati_coeffs(0.9, 1.0, 1.0, 0.0, AIR)
    assert co.family(1) == (co.A, co.B, co.C)
    assert co.family(2) == (co.Ahat, co.Bhat, co.Chat)
    assert co.A == co.Ahat
    with pytest.raises(ValueError):
        co.family(3)


def test_source_free_coefficients():
    co = riccati.riccati_coeffs(0.4, 0.9, 0.0, 0.0, AIR)
    assert co.B == 0 and co.C == 0 and co.Bhat == 0 and co.Chat == 0


@settings(max_examples=200, deadline=None)
@given(st.floats(1.05, 2.95), st.floats(-2.0, 2.0), st.floats(1e-3, 3.0), st.floats(-3, 3),
       st.floats(-3, 3))
def test_leading_coefficient_negative(gamma, S, gap, k, kp):
    co = riccati.riccati_coeffs(S, S + gap, k, kp, GasParameters(gamma, 0.1))
    assert co.A < 0 and co.Ahat < 0


@pytest.mark.parametrize("gamma", [1.4, 1.2, 2.0])
def test_small_xi_leading_term(gamma):
    gas = GasParameters(gamma, 0.1)
    S = 0.8
    for xi in (1e-2, 1e-3, 1e-4):
        lead = riccati.c_sign_leading(S, S * (1 + xi), 1.0, -0.5, gas)
        co = riccati.riccati_coeffs(S, S * (1 + xi), 1.0, -0.5, gas)
        assert abs(co.C / lead - 1) <= 10 * xi
        assert abs(co.Chat / lead - 1) <= 10 * xi


def test_small_xi_sign_needs_positive_s():
    with pytest.raises(DomainError):
        riccati.c_sign_leading(-0.1, 0.2, 1.0, -0.5, AIR)


@pytest.mark.parametrize("A,B,C,roots", [(-1.0, 0.0, 4.0, (-2.0, 2.0)),
                                         (-2.0, 1.0, 3.0, (-1.0, 1.5)),
                                         (-1.0, 3.0, 0.0, (0.0, 3.0))])
def test_quadratic_split_examples(A, B, C, roots):
    W1, W2 = riccati.quadratic_split(A, B, C)
    assert (W1, W2) == pytest.approx(roots, abs=1e-12)
    for w in (W1, W2):
        assert abs(A * w * w + B * w + C) <= 1e-9


def test_quadratic_split_negative_c_and_bad_a():
    assert riccati.quadratic_split(-1.0, 1.0, -1.0) is None
    with pytest.raises(PreconditionError):
        riccati.quadratic_split(0.5, 1.0, 1.0)


def test_split_roots_from_coefficients():
    co = riccati.riccati_coeffs(0.9, 1.0, 1.0, -1.0, AIR)
    W1, W2 = riccati.split_roots(co, 1)
    assert W1 <= 0 <= W2
    A, B, C = co.family(1)
    assert abs(A * W1 * W1 + B * W1 + C) <= 1e-9 * max(1.0, abs(C))
    assert abs(A * W2 * W2 + B * W2 + C) <= 1e-9 * max(1.0, abs(C))


def test_separating_line():
    assert riccati.separating_line([-3.0, -1.0], [2.0, 5.0]) == 0.5
    assert riccati.separating_line([-1.0, 0.5], [0.2, 1.0]) is None


def test_bound_constant_zero_roots():
    b = riccati.riccati_bound(lambda t: -1.0, lambda t: 0.0, lambda t: 0.0, 0.0, (0.0, 1.0))
    assert np.all(b.values == 0.0)
    assert b.upper(0.5) == 0.0


def test_bound_linear_growth():
    b = riccati.riccati_bound(lambda t: -2.0, lambda t: 0.0, lambda t: 3.0, 1.0, (0.0, 2.0))
    ts = np.linspace(0.0, 2.0, 11)
    assert np.allclose(b.upper(ts), 1.0 + 4.5 * ts, atol=1e-12)
    with pytest.raises(DomainError):
        b.upper(2.5)


def test_bound_simpson_accuracy():
    # A = -(1 + t), W2 - W1 = 2: integral of (1 + t) is t + t^2/2
    b = riccati.riccati_bound(lambda t: -(1 + t), lambda t: -1.0 + 0 * t, lambda t: 1.0 + 0 * t,
                              0.0, (0.0, 1.0), step=1e-2)
    assert b.upper(1.0) == pytest.approx(1.5, abs=1e-12)


@pytest.mark.parametrize("A,W1,W2,W0,t_bad", [(lambda t: t - 0.5, lambda t: 0 * t, lambda t: 1 + 0 * t, 0.0, 0.5),
                                              (lambda t: -1 + 0 * t, lambda t: t - 0.25, lambda t: 1 + 0 * t, 0.0, 0.25),
                                              (lambda t: -1 + 0 * t, lambda t: 0 * t, lambda t: 0.75 - t, 0.0, 0.75)])
def test_bound_precondition_witness(A, W1, W2, W0, t_bad):
    with pytest.raises(PreconditionError) as err:
        riccati.riccati_bound(A, W1, W2, W0, (0.0, 1.0), step=1e-3)
    assert err.value.witness == pytest.approx(t_bad, abs=2e-3)


def test_bound_rejects_negative_start():
    with pytest.raises(PreconditionError):
        riccati.riccati_bound(lambda t: -1.0, lambda t: 0.0, lambda t: 1.0, -0.1, (0.0, 1.0))


def test_rk4_order():
    errs = []
    for n in (10, 20, 40):
        t, W = riccati.integrate_riccati(lambda s, w: -w * w, 1.0, (0.0, 1.0), n)
        errs.append(abs(W[-1] - 0.5))
    assert math.log2(errs[0] / errs[1]) >= 3.8 and math.log2(errs[1] / errs[2]) >= 3.8


# symbolic check that the coefficients close the along-characteristic equation

_x, _t = sp.symbols("x t")
_S = sp.Function("S")(_x, _t)
_R = sp.Function("R")(_x, _t)
_k = sp.Function("k")(_x)
_VALS = sp.symbols("s r p q kk kp")


def symbolic_rate(gamma, family):
    """``D W`` along the characteristic, with the PDE substituted, as a function of the state."""
    g = sp.Rational(gamma).limit_denominator(1000)
    b = -(3 - g) / (2 * (g - 1))
    lam1 = (g + 1) / 4 * _S + (3 - g) / 4 * _R
    lam2 = (3 - g) / 4 * _S + (g + 1) / 4 * _R
    src = (g - 1) / 8 * _k * (_R**2 - _S**2)
    d = _R - _S
    if b == -1:
        h = -sp.log(d)
        Q1 = -_k / 2 * _S / d + _k / 2 * sp.log(d)
        Q2 = -_k / 2 * _R / d - _k / 2 * sp.log(d)
    else:
        h = b * sp.log(d)
        Q1 = _k / (2 * b) * _S * d**b + _k / (2 * (b + 1)) * d ** (b + 1)
        Q2 = _k / (2 * b) * _R * d**b - _k / (2 * (b + 1)) * d ** (b + 1)
    if family == 1:
        W, lam = sp.exp(h) * _S.diff(_x) + Q1, lam1
    else:
        W, lam = sp.exp(h) * _R.diff(_x) + Q2, lam2
    St = src - lam1 * _S.diff(_x)
    Rt = -src - lam2 * _R.diff(_x)
    D = W.diff(_t) + lam * W.diff(_x)
    D = D.subs({_S.diff(_x, _t): St.diff(_x), _R.diff(_x, _t): Rt.diff(_x)})
    D = D.subs({_S.diff(_t): St, _R.diff(_t): Rt}).doit()
    sxx, rxx = sp.symbols("sxx rxx")
    D = D.subs({_S.diff(_x, 2): sxx, _R.diff(_x, 2): rxx})
    s, r, p, q, kk, kp = _VALS
    D = D.subs({_k.diff(_x): kp}).subs({_S.diff(_x): p, _R.diff(_x): q})
    D = sp.expand(D.subs({_k: kk, _S: s, _R: r}))
    second = (sp.simplify(D.coeff(sxx)), sp.simplify(D.coeff(rxx)))
    return sp.lambdify(_VALS, D.subs({sxx: 0, rxx: 0}), "mpmath"), second


@pytest.mark.parametrize("gamma", [1.4, 5 / 3, 2.0])
@pytest.mark.parametrize("family", [1, 2])
def test_coefficients_match_symbolic_derivation(gamma, family):
    rate, second = symbolic_rate(gamma, family)
    # second derivatives must cancel for the transformation to be a Riccati equation
    assert second == (0, 0)
    gas = GasParameters(gamma, 0.1)
    rng = np.random.default_rng(7)
    for _ in range(20):
        s = rng.uniform(0.2, 1.0)
        r = s + rng.uniform(0.01, 0.5)
        p, q, kk, kp = rng.normal(size=4)
        lhs = float(rate(s, r, p, q, kk, kp))
        lq = riccati.lax_quantities(s, r, p, q, kk, gas)
        W = lq.Y if family == 1 else lq.Z
        A, B, C = riccati.riccati_coeffs(s, r, kk, kp, gas).family(family)
        assert abs(lhs - (A * W * W + B * W + C)) <= 1e-9 * (1 + abs(lhs))
