"""Boundary functional G(lam, f1, f2) for doubly-connected patches.

Each boundary is the image of the unit circle under a truncated exterior map

    phi_j(w) = b_j w + sum_{n=1}^{N} a_{j,n} w^{-(n m - 1)},   b_1 = 1, b_2 = b,

and the rotating-patch equations read G_j = Im{((1 - lam) conj(phi_j) + I(phi_j)) w phi_j'} = 0
with I the difference of the two Cauchy-type boundary integrals.  Integrals over
the circle are mean values (1/2 pi i) * int f(tau) dtau, discretized with the
trapezoid rule, which is spectrally accurate for these periodic analytic integrands.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

DEFAULT_NODES = 256
DEFAULT_MODES = 8
SEPARATION_FRACTION = 0.05


class SeparationViolation(ValueError):
    """The two boundary curves are too close (or crossed) for reliable quadrature."""


class AliasingRisk(UserWarning):
    pass


@dataclass(frozen=True)
class QuadratureGrid:
    M: int = DEFAULT_NODES
    offset: float = 0.0
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    theta: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.M < 4:
            raise ValueError(f"need at least 4 nodes, got {self.M}")
        theta = 2.0 * np.pi * (np.arange(self.M) + self.offset) / self.M
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "nodes", np.exp(1j * theta))

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.M, 1.0 / self.M)

    def mean(self, values: np.ndarray, axis: int = -1) -> np.ndarray:
        """Mean value of f over the circle: (1/2 pi i) int f(tau) dtau."""
        shape = [1] * np.ndim(values)
        shape[axis] = self.M
        return np.mean(values * self.nodes.reshape(shape), axis=axis)


@dataclass
class VStateCoeffs:
    m: int
    b: float
    a1: np.ndarray
    a2: np.ndarray

    def __post_init__(self):
        self.a1 = np.asarray(self.a1, dtype=float).copy()
        self.a2 = np.asarray(self.a2, dtype=float).copy()
        if self.a1.shape != self.a2.shape or self.a1.ndim != 1:
            raise ValueError("a1 and a2 must be 1-D arrays of equal length")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")

    @property
    def N(self) -> int:
        return self.a1.size

    @classmethod
    def annulus(cls, m: int, b: float, N: int = DEFAULT_MODES) -> "VStateCoeffs":
        return cls(m=m, b=b, a1=np.zeros(N), a2=np.zeros(N))

    @property
    def exponents(self) -> np.ndarray:
        return np.arange(1, self.N + 1) * self.m - 1

    def coeffs(self, j: int) -> np.ndarray:
        return self.a1 if j == 1 else self.a2

    def radius(self, j: int) -> float:
        return 1.0 if j == 1 else self.b

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.a1, self.a2])

    def with_vector(self, x) -> "VStateCoeffs":
        x = np.asarray(x, dtype=float)
        return VStateCoeffs(m=self.m, b=self.b, a1=x[: self.N], a2=x[self.N :])

    def quarter_turn(self) -> "VStateCoeffs":
        """Coefficients of (1/c) phi_j(c w) with c = exp(i pi / m): a_{j,n} -> (-1)^n a_{j,n}.

        For m = 2 this is the rotation by a right angle.
        """
        sign = (-1.0) ** np.arange(1, self.N + 1)
        return VStateCoeffs(m=self.m, b=self.b, a1=sign * self.a1, a2=sign * self.a2)

    def truncation_tail(self) -> float:
        """Size of the last retained mode relative to the largest one."""
        mags = np.maximum(np.abs(self.a1), np.abs(self.a2))
        top = mags.max()
        return 0.0 if top == 0.0 else float(mags[-1] / top)


def eval_map(c: VStateCoeffs, j: int, w) -> Tuple[np.ndarray, np.ndarray]:
    """phi_j(w) and phi_j'(w) from the truncated Laurent series."""
    w = np.asarray(w, dtype=complex)
    ex = c.exponents
    a = c.coeffs(j)
    bj = c.radius(j)
    powers = w[..., None] ** (-ex)
    value = bj * w + powers @ a
    deriv = bj - (powers / w[..., None]) @ (a * ex)
    return value, deriv


def check_separation(c: VStateCoeffs, grid: QuadratureGrid) -> float:
    outer, _ = eval_map(c, 1, grid.nodes)
    inner, _ = eval_map(c, 2, grid.nodes)
    gap = np.abs(outer).min() - np.abs(inner).max()
    if not gap > SEPARATION_FRACTION * (1.0 - c.b):
        raise SeparationViolation(f"boundary gap {gap:.3e} below {SEPARATION_FRACTION}*(1-b)")
    return float(gap)


def _boundary_integral(z, dz_target, w_target, phi, dphi, grid: QuadratureGrid, self_term: bool):
    # mean over tau of (conj z - conj phi(tau)) / (z - phi(tau)) * phi'(tau)
    num = np.conj(z)[:, None] - np.conj(phi)[None, :]
    den = z[:, None] - phi[None, :]
    if self_term:
        hit = np.abs(w_target[:, None] - grid.nodes[None, :]) < 1e-14
        den = np.where(hit, 1.0, den)
        kern = num / den * dphi[None, :]
        # removable singularity: limit -conj(phi'(w)) / w^2
        limit = -np.conj(dz_target) / w_target**2
        kern = np.where(hit, limit[:, None], kern)
    else:
        kern = num / den * dphi[None, :]
    return grid.mean(kern, axis=1)


def eval_I(c: VStateCoeffs, j: int, grid: QuadratureGrid, w, check: bool = True) -> np.ndarray:
    """I(phi_j(w)) = mean over tau of the phi_1 kernel minus the phi_2 kernel."""
    if check:
        check_separation(c, grid)
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    z, dz = eval_map(c, j, w)
    total = np.zeros(w.shape, dtype=complex)
    for i, sign in ((1, 1.0), (2, -1.0)):
        phi, dphi = eval_map(c, i, grid.nodes)
        total += sign * _boundary_integral(z, dz, w, phi, dphi, grid, self_term=(i == j))
    return total


@dataclass
class FunctionalValue:
    g1: np.ndarray
    g2: np.ndarray
    raw1: np.ndarray
    raw2: np.ndarray

    def mode(self, n: int) -> np.ndarray:
        """(B_{1,n}, B_{2,n}) for the mode e_{nm}, n >= 1."""
        return np.array([self.g1[n - 1], self.g2[n - 1]])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.g1, self.g2])

    @property
    def max_coeff(self) -> float:
        return float(max(np.abs(self.g1).max(), np.abs(self.g2).max()))


def _self_integral(z, dz, w, grid: QuadratureGrid):
    # targets coincide with the quadrature nodes; the patched diagonal (ratio 1)
    # is swapped for the limit -conj(phi'(w))/w^2
    d = z[:, None] - z[None, :]
    np.fill_diagonal(d, 1.0)
    weighted = dz * w
    full = (np.conj(d) / d) @ weighted
    return (full - weighted - np.conj(dz) / w) / grid.M


def _cross_integral(z, phi, dphi, grid: QuadratureGrid):
    d = z[:, None] - phi[None, :]
    return (np.conj(d) / d) @ (dphi * grid.nodes) / grid.M


def pointwise_G(c: VStateCoeffs, lam: float, grid: QuadratureGrid, check: bool = True):
    """G_1, G_2 sampled at the quadrature nodes."""
    if check:
        check_separation(c, grid)
    w = grid.nodes
    z1, dz1 = eval_map(c, 1, w)
    z2, dz2 = eval_map(c, 2, w)
    I1 = _self_integral(z1, dz1, w, grid) - _cross_integral(z1, z2, dz2, grid)
    I2 = _cross_integral(z2, z1, dz1, grid) - _self_integral(z2, dz2, w, grid)
    raw1 = np.imag(((1.0 - lam) * np.conj(z1) + I1) * w * dz1)
    raw2 = np.imag(((1.0 - lam) * np.conj(z2) + I2) * w * dz2)
    return raw1, raw2


def project_modes(raw, m: int, N: int, grid: Optional[QuadratureGrid] = None) -> np.ndarray:
    """Coefficients of e_{nm} = Im(conj(w)^{nm}) = -sin(nm theta), n = 1..N."""
    raw = np.asarray(raw, dtype=float)
    if grid is None:
        grid = QuadratureGrid(raw.size)
    if grid.M < 4 * N * m:
        warnings.warn(f"M={grid.M} < 4*N*m={4 * N * m}", AliasingRisk, stacklevel=2)
    k = np.arange(1, N + 1)[:, None] * m
    basis = -np.sin(k * grid.theta[None, :])
    return 2.0 / grid.M * (basis @ raw)


def fourier_content(raw, grid: Optional[QuadratureGrid] = None) -> Tuple[np.ndarray, np.ndarray]:
    """(cosine, e_k) coefficients for k = 0..M/2 - 1; used for off-lattice diagnostics."""
    raw = np.asarray(raw, dtype=float)
    if grid is None:
        grid = QuadratureGrid(raw.size)
    k = np.arange(grid.M // 2)[:, None]
    cos = 2.0 / grid.M * (np.cos(k * grid.theta[None, :]) @ raw)
    sin = 2.0 / grid.M * (-np.sin(k * grid.theta[None, :]) @ raw)
    cos[0] *= 0.5
    return cos, sin


def parseval_defect(raw, coeffs, grid: Optional[QuadratureGrid] = None) -> float:
    """Mean square of raw minus the energy captured by the sine coefficients."""
    raw = np.asarray(raw, dtype=float)
    return float(np.mean(raw**2) - 0.5 * np.sum(np.asarray(coeffs) ** 2))


def eval_G(c: VStateCoeffs, lam: float, grid: Optional[QuadratureGrid] = None) -> FunctionalValue:
    grid = grid or QuadratureGrid()
    raw1, raw2 = pointwise_G(c, lam, grid)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AliasingRisk)
        g1 = project_modes(raw1, c.m, c.N, grid)
        g2 = project_modes(raw2, c.m, c.N, grid)
    return FunctionalValue(g1=g1, g2=g2, raw1=raw1, raw2=raw2)


def residual_vector(c: VStateCoeffs, lam: float, grid: QuadratureGrid) -> np.ndarray:
    """Stacked sine coefficients (B_{1,1..N}, B_{2,1..N}) of G."""
    return eval_G(c, lam, grid).as_vector()


def numeric_multiplier(
    n: int,
    lam: float,
    b: float,
    m: int,
    grid: Optional[QuadratureGrid] = None,
    h: float = 1e-4,
    N: Optional[int] = None,
    richardson: bool = True,
) -> np.ndarray:
    """2x2 action of D_f G(lam, 0) on mode n by central differences (optionally Richardson over h, h/2).

    Column k is the response (B_{1,n}, B_{2,n}) to a unit perturbation of a_{k,n}.
    """
    grid = grid or QuadratureGrid()
    N = N or n
    base = VStateCoeffs.annulus(m, b, N)

    def column(k, step):
        x = np.zeros(2 * N)
        x[(k - 1) * N + n - 1] = step
        plus = eval_G(base.with_vector(x), lam, grid).mode(n)
        minus = eval_G(base.with_vector(-x), lam, grid).mode(n)
        return (plus - minus) / (2.0 * step)

    out = np.empty((2, 2))
    for k in (1, 2):
        if richardson:
            out[:, k - 1] = (4.0 * column(k, h / 2) - column(k, h)) / 3.0
        else:
            out[:, k - 1] = column(k, h)
    return out


def offset_grid_defect(c: VStateCoeffs, grid: Optional[QuadratureGrid] = None) -> float:
    """Max |I| discrepancy between the diagonal-limit rule and a half-step shifted rule.

    Targets are the nodes of ``grid``; the shifted rule never hits tau = w, so it
    is an independent check of the removable-singularity value.
    """
    grid = grid or QuadratureGrid()
    shifted = QuadratureGrid(grid.M, offset=grid.offset + 0.5)
    worst = 0.0
    for j in (1, 2):
        on = eval_I(c, j, grid, grid.nodes)
        off = eval_I(c, j, shifted, grid.nodes)
        worst = max(worst, float(np.abs(on - off).max()))
    return worst
