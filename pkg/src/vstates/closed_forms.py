"""Explicit coefficients of the reduced bifurcation equation at the degenerate point.

All formulas live at lam = lam_m = (1 + b^2)/2 with the kernel v_m = (eps b, 1) w^{-(m-1)}
and the cokernel direction W = (1, -eps)/sqrt(2).  Quantities marked "m >= 3" are
only meaningful at b = b_m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .contour import QuadratureGrid
from .spectral import epsilon

SQRT2 = math.sqrt(2.0)

_POLE_ORDER = {"pole1": 1, "pole2": 2, "pole3": 3}


def alpha_hat(m: int, b: float) -> float:
    """First component of the mode-2m coefficient of d^2 G(lam_m, 0)[v_m, v_m]."""
    return 2.0 * m * (b * b - epsilon(m) * b**m) ** 2


def beta_hat(m: int, b: float) -> float:
    bm = b**m
    return 2.0 * m * (b * b + bm) ** 2 / ((bm + 1.0) ** 2 * (-bm * bm + 2.0 * bm + 1.0))


def gamma_hat(m: int, b: float) -> float:
    return (
        (m - 2) * b
        + m * b ** (2 * m - 1)
        + (4 * m - 6) * b ** (m + 1)
        + 4 * (m - 1) * b ** (2 * m + 1)
        + 2 * m * b ** (3 * m - 1)
    )


def hessian_closed(m: int, b: float) -> Tuple[float, float, float]:
    """(d_ll, d_tl, d_tt) of the reduced function at (lam_m, 0)."""
    d_ll = SQRT2 * m * m * b ** (1 - m)
    if m == 2:
        d_tt = -SQRT2 * (1.0 - b * b) ** 2 / b
    else:
        d_tt = (m * (m - 1) * (1.0 - b * b) ** 2 / b + beta_hat(m, b) * gamma_hat(m, b)) / SQRT2
    return d_ll, 0.0, d_tt


def third_derivative_coeff(m: int, b: float) -> float:
    """(1/3) d^3/dt^3 of Q G(lam_m, t v_m) at t = 0."""
    return -epsilon(m) * m * (m - 1) * (1.0 - b * b) ** 2 / (b * SQRT2)


@dataclass(frozen=True)
class VTilde:
    """Second-order complement correction, carried by the Laurent monomial w^{-mode}."""

    components: Tuple[float, float]
    mode: int
    vanishes: bool

    def as_array(self) -> np.ndarray:
        return np.array(self.components)


def vtilde(m: int, b: float) -> VTilde:
    if m < 2:
        raise ValueError(f"vtilde needs m >= 2, got {m}")
    if m == 2:
        return VTilde(components=(0.0, 0.0), mode=2 * m - 1, vanishes=True)
    bh = beta_hat(m, b)
    return VTilde(components=(-bh * (1.0 + 2.0 * b**m), bh * b ** (2 * m - 1)), mode=2 * m - 1, vanishes=False)


def transcritical_slope(b: float) -> float:
    """|d lam / dt| of the two curves crossing at (lam_2, 0): root of d_ll s^2 + d_tt = 0."""
    return 0.5 * (1.0 - b * b)


def f2_on_axis(m: int, b: float, delta: float) -> float:
    """Limit of F2(lam_m + delta, t) as t -> 0.

    Solving the linearized range equation gives the complement amplitude
    alpha = 2 delta m b / (2 b^m - eps delta m); projecting on W leaves m delta alpha / sqrt(2),
    so the second lam-derivative at delta = 0 is sqrt(2) m^2 b^(1 - m).
    """
    alpha = 2.0 * delta * m * b / (2.0 * b**m - epsilon(m) * delta * m)
    return m * delta * alpha / SQRT2


def first_variation_I(m: int, b: float, j: int) -> float:
    """Coefficient of conj(w)^{m+1} in d I(phi_j)[v_m] at the annulus."""
    if j == 1:
        return b ** (m + 1) - epsilon(m) * b**3
    return 0.0


def third_variation_G(m: int, b: float) -> np.ndarray:
    """Mode-m coefficients of d^3 G(lam_m, 0)[v_m, v_m, v_m]."""
    eps = epsilon(m)
    scale = 3.0 * m * (m - 1)
    return scale * np.array(
        [2.0 * eps * b - b ** (m - 1) - eps * b**3, -eps * b ** (m - 1) + 1.0 / b]
    )


def residue_closed(kind: str, m: int, b: float) -> float:
    p = _POLE_ORDER[kind]
    if p == 1:
        return b ** (m - 1)
    if p == 2:
        return m * b ** (m - 1)
    return 0.5 * (m + 1) * m * b ** (m - 1)


def residue_oracle(kind: str, m: int, b: float, grid: Optional[QuadratureGrid] = None) -> Tuple[float, float]:
    """Closed value and trapezoid value of the mean of conj(tau)^m / (1 - b tau)^p."""
    if kind not in _POLE_ORDER:
        raise ValueError(f"kind must be one of {sorted(_POLE_ORDER)}")
    if not 0.0 < b < 1.0:
        raise ValueError(f"b must lie in (0, 1), got {b}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    grid = grid or QuadratureGrid()
    tau = grid.nodes
    vals = np.conj(tau) ** m / (1.0 - b * tau) ** _POLE_ORDER[kind]
    quad = grid.mean(vals)
    # the imaginary part is pure quadrature noise for real b
    return residue_closed(kind, m, b), float(quad.real)


@dataclass(frozen=True)
class DerivativeCoefficients:
    m: int
    b: float
    alpha_hat: float
    beta_hat: Optional[float]
    gamma_hat: Optional[float]
    third_deriv: float
    hess_ll: float
    hess_tt: float
    vtilde: Tuple[float, float]
    vtilde_zero_flag: bool

    @classmethod
    def at(cls, m: int, b: float) -> "DerivativeCoefficients":
        d_ll, _, d_tt = hessian_closed(m, b)
        vt = vtilde(m, b)
        return cls(
            m=m,
            b=b,
            alpha_hat=alpha_hat(m, b),
            beta_hat=None if m == 2 else beta_hat(m, b),
            gamma_hat=None if m == 2 else gamma_hat(m, b),
            third_deriv=third_derivative_coeff(m, b),
            hess_ll=d_ll,
            hess_tt=d_tt,
            vtilde=vt.components,
            vtilde_zero_flag=vt.vanishes,
        )
