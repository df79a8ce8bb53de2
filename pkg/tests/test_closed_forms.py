import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from vstates import closed_forms as cf
from vstates.contour import QuadratureGrid
from vstates.spectral import degenerate_lambda, degenerate_radius, multiplier_entries

from conftest import B4

SQ2 = math.sqrt(2.0)


def frac_alpha(m, b):
    eps = 1 if m == 2 else -1
    return 2 * m * (b * b - eps * b**m) ** 2


def test_alpha_hat_values():
    assert cf.alpha_hat(3, 0.5) == float(frac_alpha(3, Fraction(1, 2))) == 0.84375
    assert cf.alpha_hat(4, B4) == pytest.approx(8 * (B4**2 + B4**4) ** 2, rel=1e-15)


@given(st.floats(min_value=0.01, max_value=0.99))
def test_alpha_hat_zero_for_m2(b):
    assert cf.alpha_hat(2, b) == 0.0


def test_beta_gamma_values():
    assert cf.beta_hat(3, 0.5) == pytest.approx(0.84375 / (1.265625 * 1.234375), rel=1e-15)
    exact = Fraction(84375, 100000) / (Fraction(1265625, 1000000) * Fraction(1234375, 1000000))
    assert cf.beta_hat(3, 0.5) == pytest.approx(float(exact), rel=1e-15)
    assert cf.beta_hat(3, 0.5) == pytest.approx(0.5400844, abs=5e-8)
    g = Fraction(1, 2) + Fraction(3, 32) + Fraction(6, 16) + Fraction(8, 128) + Fraction(6, 256)
    assert g == Fraction(135, 128)
    assert cf.gamma_hat(3, 0.5) == float(g) == 1.0546875


@pytest.mark.parametrize("m", range(3, 13))
def test_beta_positive_and_tt_positive(m):
    b = degenerate_radius(m)
    assert cf.beta_hat(m, b) > 0
    assert cf.hessian_closed(m, b)[2] > 0


@given(st.floats(min_value=0.02, max_value=0.98))
def test_tt_negative_for_m2(b):
    assert cf.hessian_closed(2, b)[2] < 0


def test_hessian_values():
    d_ll, d_tl, d_tt = cf.hessian_closed(3, 0.5)
    assert d_ll == pytest.approx(36 * SQ2, rel=1e-15)
    assert d_tl == 0.0
    assert d_tt == pytest.approx((6 * 0.75**2 / 0.5 + cf.beta_hat(3, 0.5) * 1.0546875) / SQ2, rel=1e-15)
    assert cf.hessian_closed(2, 0.4)[2] == pytest.approx(-SQ2 * 0.84**2 / 0.4, rel=1e-15)
    assert cf.hessian_closed(2, 0.4)[2] == pytest.approx(-2.49467, abs=5e-6)


def test_third_derivative_values():
    assert cf.third_derivative_coeff(2, 0.4) == pytest.approx(-2.49467, abs=5e-6)
    assert cf.third_derivative_coeff(3, 0.5) == pytest.approx(6 * 0.75**2 / (0.5 * SQ2), rel=1e-15)
    assert cf.third_derivative_coeff(3, 0.5) == pytest.approx(4.77297, abs=5e-6)
    # for m = 2 the cubic coefficient and d_tt coincide because v~_2 = 0
    for b in (0.2, 0.4, 0.7):
        assert cf.third_derivative_coeff(2, b) == pytest.approx(cf.hessian_closed(2, b)[2], rel=1e-15)


@given(st.integers(min_value=2, max_value=12), st.floats(min_value=0.05, max_value=0.95))
def test_third_derivative_sign(m, b):
    eps = 1 if m == 2 else -1
    assert math.copysign(1, cf.third_derivative_coeff(m, b)) == -eps


def test_vtilde_values():
    v = cf.vtilde(2, 0.4)
    assert v.vanishes and v.components == (0.0, 0.0) and v.mode == 3
    v = cf.vtilde(3, 0.5)
    bh = cf.beta_hat(3, 0.5)
    assert v.mode == 5
    assert v.components == pytest.approx((-1.25 * bh, 0.03125 * bh), rel=1e-15)


@pytest.mark.parametrize("m", range(3, 9))
def test_vtilde_solves_second_order_equation(m):
    # -M_{2m}(lam_m) v~ = (alpha_hat, 0)
    b = degenerate_radius(m)
    lhs = -multiplier_entries(2 * m, degenerate_lambda(b), b) @ cf.vtilde(m, b).as_array()
    assert np.abs(lhs - [cf.alpha_hat(m, b), 0.0]).max() <= 1e-10


def test_transcritical_slope():
    assert cf.transcritical_slope(0.4) == pytest.approx(0.42, abs=1e-15)
    assert cf.transcritical_slope(1e-9) == pytest.approx(0.5)
    for b in (0.1, 0.3, 0.4, 0.6, 0.9):
        d_ll, _, d_tt = cf.hessian_closed(2, b)
        assert cf.transcritical_slope(b) ** 2 == pytest.approx(-d_tt / d_ll, abs=1e-12)


def test_third_variation_vector_structure():
    # the W-component of d^3 G[v, v, v] is three times the cubic coefficient
    for m, b in [(2, 0.4), (3, 0.5), (4, B4)]:
        eps = 1 if m == 2 else -1
        g = cf.third_variation_G(m, b)
        q = (g[0] - eps * g[1]) / SQ2
        assert q == pytest.approx(3 * cf.third_derivative_coeff(m, b), rel=1e-13)


@pytest.mark.parametrize("kind,closed", [("pole1", 0.25), ("pole2", 0.75), ("pole3", 1.5)])
def test_residue_examples(kind, closed):
    c, q = cf.residue_oracle(kind, 3, 0.5)
    assert c == closed
    assert abs(q - closed) <= 1e-12


@pytest.mark.parametrize("kind", ["pole1", "pole2", "pole3"])
@pytest.mark.parametrize("m", range(1, 11))
@pytest.mark.parametrize("b", [0.2, 0.5, 0.8])
def test_residue_grid(kind, m, b):
    c, q = cf.residue_oracle(kind, m, b, QuadratureGrid(256))
    assert abs(c - q) <= 1e-10


def test_residue_oracle_rejects():
    with pytest.raises(ValueError):
        cf.residue_oracle("pole4", 1, 0.5)
    with pytest.raises(ValueError):
        cf.residue_oracle("pole1", 1, 1.5)


def test_derivative_coefficients_bundle():
    d = cf.DerivativeCoefficients.at(3, 0.5)
    assert d.alpha_hat == 0.84375 and d.gamma_hat == 1.0546875 and not d.vtilde_zero_flag
    d2 = cf.DerivativeCoefficients.at(2, 0.4)
    assert d2.beta_hat is None and d2.vtilde_zero_flag and d2.alpha_hat == 0.0


# symbolic transcription check: formulas retyped in sympy, derivative in b compared
# with a central difference of the implemented function
bs, ms = sp.symbols("b m", positive=True)


def _sym(m):
    eps = 1 if m == 2 else -1
    b = bs
    alpha = 2 * m * (b**2 - eps * b**m) ** 2
    beta = 2 * m * (b**2 + b**m) ** 2 / ((b**m + 1) ** 2 * (-(b ** (2 * m)) + 2 * b**m + 1))
    gamma = (m - 2) * b + m * b ** (2 * m - 1) + (4 * m - 6) * b ** (m + 1) + 4 * (m - 1) * b ** (2 * m + 1) + 2 * m * b ** (3 * m - 1)
    ll = sp.sqrt(2) * m**2 * b ** (1 - m)
    if m == 2:
        tt = -sp.sqrt(2) * (1 - b**2) ** 2 / b
    else:
        tt = (m * (m - 1) * (1 - b**2) ** 2 / b + beta * gamma) / sp.sqrt(2)
    return {"alpha_hat": alpha, "beta_hat": beta, "gamma_hat": gamma, "ll": ll, "tt": tt}


def _num(name, m, b):
    if name in ("ll", "tt"):
        d = cf.hessian_closed(m, b)
        return d[0] if name == "ll" else d[2]
    return getattr(cf, name)(m, b)


@pytest.mark.parametrize("m", [2, 3, 4, 5])
@pytest.mark.parametrize("name", ["alpha_hat", "beta_hat", "gamma_hat", "ll", "tt"])
def test_symbolic_transcription(m, name):
    if m == 2 and name in ("beta_hat", "gamma_hat"):
        pytest.skip("defined for m >= 3")
    expr = _sym(m)[name]
    dexpr = sp.diff(expr, bs)
    h = 1e-5
    for b0 in (0.3, 0.55, 0.8):
        assert _num(name, m, b0) == pytest.approx(float(expr.subs(bs, b0)), rel=1e-13)
        fd = (_num(name, m, b0 + h) - _num(name, m, b0 - h)) / (2 * h)
        exact = float(dexpr.subs(bs, b0))
        assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))
