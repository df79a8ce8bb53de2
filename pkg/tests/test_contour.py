import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vstates.closed_forms import first_variation_I
from vstates.contour import (
    AliasingRisk,
    QuadratureGrid,
    SeparationViolation,
    VStateCoeffs,
    check_separation,
    eval_G,
    eval_I,
    eval_map,
    fourier_content,
    numeric_multiplier,
    offset_grid_defect,
    parseval_defect,
    project_modes,
)
from vstates.spectral import epsilon, multiplier_entries


def small_coeffs(m, b, N=4, seed=0, scale=0.02):
    rng = np.random.default_rng(seed)
    decay = 0.3 ** np.arange(N)
    return VStateCoeffs(m=m, b=b, a1=scale * decay * rng.standard_normal(N), a2=scale * b * decay * rng.standard_normal(N))


def test_grid_nodes_and_mean(grid):
    assert np.allclose(np.abs(grid.nodes), 1.0)
    assert grid.nodes[0] == 1.0
    assert grid.weights.sum() == pytest.approx(1.0)
    # mean of tau^{-1} is 1, of any other power it is 0
    assert grid.mean(1.0 / grid.nodes) == pytest.approx(1.0, abs=1e-15)
    assert abs(grid.mean(np.ones(grid.M))) < 1e-15
    assert abs(grid.mean(grid.nodes**3)) < 1e-15


def test_eval_map_trivial_cases():
    c = VStateCoeffs.annulus(2, 0.3, 3)
    v, d = eval_map(c, 1, 1j)
    assert v == pytest.approx(1j) and d == pytest.approx(1.0)
    v, d = eval_map(c, 2, 1.0)
    assert v == pytest.approx(0.3) and d == pytest.approx(0.3)
    e = VStateCoeffs(m=2, b=0.3, a1=[0.2], a2=[0.0])
    v, d = eval_map(e, 1, 1.0)
    assert v == pytest.approx(1.2) and d == pytest.approx(0.8)


@given(st.floats(min_value=0, max_value=2 * np.pi), st.integers(min_value=2, max_value=5))
def test_eval_map_derivative_matches_fd(theta, m):
    c = small_coeffs(m, 0.4, seed=m)
    w = np.exp(1j * theta)
    h = 1e-6
    fp, _ = eval_map(c, 1, w + h)
    fm, _ = eval_map(c, 1, w - h)
    _, d = eval_map(c, 1, w)
    assert abs((fp - fm) / (2 * h) - d) < 1e-8


def test_quarter_turn_is_rotation():
    c = small_coeffs(3, 0.5)
    q = c.quarter_turn()
    rot = np.exp(1j * np.pi / 3)
    w = np.exp(1j * np.linspace(0, 6, 7))
    for j in (1, 2):
        lhs, _ = eval_map(q, j, w)
        rhs, _ = eval_map(c, j, rot * w)
        assert np.allclose(lhs, rhs / rot, atol=1e-15)


@pytest.mark.parametrize("lam", [0.2, 0.58, 0.625, 0.9])
@pytest.mark.parametrize("m,b", [(2, 0.4), (3, 0.5), (5, 0.7)])
def test_trivial_solution(grid, lam, m, b):
    fv = eval_G(VStateCoeffs.annulus(m, b, 8), lam, grid)
    assert fv.max_coeff <= 1e-10
    assert np.abs(fv.raw1).max() <= 1e-10 and np.abs(fv.raw2).max() <= 1e-10


def test_annulus_integral_value(grid):
    # for the annulus I(w) = -(1 - b^2) conj(w) on the outer circle and 0 on the inner one
    b = 0.4
    c = VStateCoeffs.annulus(2, b, 4)
    w = grid.nodes
    assert np.allclose(eval_I(c, 1, grid, w), -(1 - b * b) * np.conj(w), atol=1e-14)
    assert np.allclose(eval_I(c, 2, grid, w), 0.0, atol=1e-14)


def test_offset_grid_agreement(grid):
    for m, b in [(2, 0.4), (3, 0.5), (4, 0.6)]:
        assert offset_grid_defect(small_coeffs(m, b, seed=m), grid) <= 1e-10


def test_eval_I_off_node_targets(grid):
    # off-node targets never meet the diagonal; compare with a finer grid
    c = small_coeffs(3, 0.5)
    w = np.exp(1j * np.array([0.1, 1.3, 2.9]))
    fine = QuadratureGrid(512)
    for j in (1, 2):
        assert np.allclose(eval_I(c, j, grid, w), eval_I(c, j, fine, w), atol=1e-12)


def test_quadrature_converges_spectrally():
    c = small_coeffs(3, 0.5, N=3)
    g64, g128, g256 = (eval_G(c, 0.6, QuadratureGrid(M)).as_vector() for M in (64, 128, 256))
    assert np.abs(g128 - g256).max() <= 1e-12
    assert np.abs(g64 - g256).max() > np.abs(g128 - g256).max()


def test_first_variation_of_I(grid):
    # along v_m only conj(w)^{m+1} appears on the outer boundary
    for m, b in [(3, 0.5), (2, 0.4), (4, 0.6)]:
        eps, t = epsilon(m), 1e-4

        def I(s):
            c = VStateCoeffs.annulus(m, b, 4)
            c.a1[0], c.a2[0] = s * eps * b, s
            return eval_I(c, 1, grid, grid.nodes)

        dI = (I(t) - I(-t)) / (2 * t)
        coef = np.mean(dI * grid.nodes ** (m + 1))
        assert coef.real == pytest.approx(first_variation_I(m, b, 1), abs=1e-7)
        rest = dI - coef * np.conj(grid.nodes) ** (m + 1)
        assert np.abs(rest).max() < 1e-6


def test_first_variation_of_I_small_step(grid):
    m, b, t = 3, 0.5, 1e-3
    c = VStateCoeffs.annulus(m, b, 4)
    c.a1[0], c.a2[0] = -t * b, t
    base = eval_I(VStateCoeffs.annulus(m, b, 4), 1, grid, grid.nodes)
    lin = base + t * first_variation_I(m, b, 1) * np.conj(grid.nodes) ** (m + 1)
    assert np.abs(eval_I(c, 1, grid, grid.nodes) - lin).max() < 10 * t * t


@pytest.mark.parametrize("m,b,lam", [(3, 0.5, 0.6), (2, 0.4, 0.7), (4, 0.3, 0.45)])
def test_linearization_is_multiplier(grid, m, b, lam):
    for n in range(1, 5):
        num = numeric_multiplier(n, lam, b, m, grid, h=1e-5, N=n, richardson=False)
        exact = multiplier_entries(n * m, lam, b)
        assert np.abs(num - exact).max() <= 1e-6 * np.abs(exact).max()


def test_linearization_random_direction(grid):
    rng = np.random.default_rng(3)
    m, b, lam, h = 3, 0.5, 0.6, 1e-5
    for n in range(1, 5):
        d = rng.standard_normal(2)
        d /= np.linalg.norm(d)
        c = VStateCoeffs.annulus(m, b, 4)
        x = np.zeros(8)
        x[n - 1], x[4 + n - 1] = d
        plus = eval_G(c.with_vector(h * x), lam, grid).mode(n)
        minus = eval_G(c.with_vector(-h * x), lam, grid).mode(n)
        exact = multiplier_entries(n * m, lam, b) @ d
        assert np.linalg.norm((plus - minus) / (2 * h) - exact) <= 1e-6 * np.linalg.norm(exact)


def test_project_modes_orthonormality(grid):
    th = grid.theta
    m, N = 3, 4
    assert np.allclose(project_modes(-np.sin(m * th), m, N, grid), [1, 0, 0, 0], atol=1e-14)
    assert np.allclose(project_modes(-np.sin((m + 1) * th), m, N, grid), 0, atol=1e-14)
    assert np.allclose(project_modes(-3 * np.sin(2 * m * th), m, N, grid), [0, 3, 0, 0], atol=1e-14)


def test_project_modes_aliasing_warning():
    g = QuadratureGrid(32)
    with pytest.warns(AliasingRisk):
        project_modes(np.zeros(32), 3, 4, g)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        project_modes(np.zeros(64), 2, 8, QuadratureGrid(64))


def test_parseval_on_lattice_functional(grid):
    c = small_coeffs(3, 0.5, N=8)
    fv = eval_G(c, 0.6, grid)
    for raw, g in ((fv.raw1, fv.g1), (fv.raw2, fv.g2)):
        # energy outside the retained sine modes is only the tail beyond mode 8m
        full = project_modes(raw, 3, 21, grid)
        assert abs(parseval_defect(raw, full, grid)) < 1e-20
        assert abs(parseval_defect(raw, g, grid)) < 1e-12


def test_no_cosine_or_off_lattice_content(grid):
    c = small_coeffs(3, 0.5, N=5)
    fv = eval_G(c, 0.55, grid)
    cos, sin = fourier_content(fv.raw1, grid)
    off = np.array([k for k in range(len(sin)) if k % 3 != 0])
    assert np.abs(cos).max() < 1e-14
    assert np.abs(sin[off]).max() < 1e-14


def test_m_fold_rotation_equivariance(grid):
    # the m-fold rotation leaves real coefficient sets unchanged, hence also G
    c = small_coeffs(3, 0.5)
    again = VStateCoeffs(m=3, b=0.5, a1=c.a1.copy(), a2=c.a2.copy())
    assert np.array_equal(eval_G(c, 0.6, grid).as_vector(), eval_G(again, 0.6, grid).as_vector())


def test_quarter_turn_flips_odd_modes(grid):
    c = small_coeffs(3, 0.5)
    g = eval_G(c, 0.6, grid)
    q = eval_G(c.quarter_turn(), 0.6, grid)
    sign = (-1.0) ** np.arange(1, c.N + 1)
    assert np.allclose(q.g1, sign * g.g1, atol=1e-15)
    assert np.allclose(q.g2, sign * g.g2, atol=1e-15)


def test_separation_violation(grid):
    c = VStateCoeffs(m=2, b=0.9, a1=[-0.05], a2=[0.05])
    with pytest.raises(SeparationViolation):
        check_separation(c, grid)
    with pytest.raises(SeparationViolation):
        eval_G(c, 0.5, grid)
    assert check_separation(VStateCoeffs.annulus(3, 0.5, 2), grid) == pytest.approx(0.5)


def test_coeff_validation():
    with pytest.raises(ValueError):
        VStateCoeffs(m=3, b=0.5, a1=[0.0, 0.0], a2=[0.0])
    with pytest.raises(ValueError):
        QuadratureGrid(2)


def test_truncation_tail():
    c = VStateCoeffs(m=2, b=0.5, a1=[1e-2, 1e-4], a2=[5e-3, 1e-5])
    assert c.truncation_tail() == pytest.approx(1e-2)
    assert VStateCoeffs.annulus(2, 0.5).truncation_tail() == 0.0
