"""Closed-form spectral data of the linearized V-state operator around the annulus.

The linearization at the annulus {b < |z| < 1} acts on the Laurent mode
w^{-(n-1)} through the 2x2 multiplier

    M_n(lam) = [[n*lam - 1 - n*b^2,  b^(n+1)          ],
                [-b^n,               b*(n*lam - n + 1)]]

with lam = 1 - 2*Omega.  Everything here is plain arithmetic on that matrix.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

DEGENERATE_TOL = 1e-12
TWO_D_CAP = 64
TWO_D_MATCH_TOL = 1e-9


def epsilon(m: int) -> int:
    """Sign convention of the unified degenerate multiplier: +1 for m = 2, -1 for m >= 3."""
    if m == 2:
        return 1
    if m >= 3:
        return -1
    raise ValueError(f"epsilon is defined for m >= 2, got m={m}")


def degenerate_lambda(b: float) -> float:
    return 0.5 * (1.0 + b * b)


def discriminant(n: int, b: float) -> float:
    """Discriminant of det M_n(lam) = 0 in the variable lam (real roots iff >= 0).

    Zero for every b when n = 2, and zero at b = b_n for n >= 3.
    """
    if n < 1:
        raise ValueError(f"mode must be >= 1, got {n}")
    return (0.5 * n * (1.0 - b * b) - 1.0) ** 2 - b ** (2 * n)


def eigenvalues(n: int, b: float) -> Optional[Tuple[float, float]]:
    """Return (lam_n^-, lam_n^+) or None when the discriminant is negative."""
    d = discriminant(n, b)
    if abs(d) < DEGENERATE_TOL:
        # double root (always the case for n = 2); snap round-off
        d = 0.0
    elif d < 0.0:
        return None
    r = math.sqrt(d) / n
    c = degenerate_lambda(b)
    return c - r, c + r


def omega_from_lambda(lam: float) -> float:
    return 0.5 * (1.0 - lam)


def lambda_from_omega(omega: float) -> float:
    return 1.0 - 2.0 * omega


@dataclass(frozen=True)
class SpectralMatrix:
    n: int
    lam: float
    b: float
    entries: np.ndarray
    det: float
    discriminant: float
    roots: Optional[Tuple[float, float]]

    def apply(self, vec) -> np.ndarray:
        return self.entries @ np.asarray(vec, dtype=float)


def multiplier_entries(n: int, lam: float, b: float) -> np.ndarray:
    return np.array(
        [
            [n * lam - 1.0 - n * b * b, b ** (n + 1)],
            [-(b**n), b * (n * lam - n + 1.0)],
        ]
    )


def multiplier_matrix(n: int, lam: float, b: float) -> SpectralMatrix:
    if n < 1:
        raise ValueError(f"mode must be >= 1, got {n}")
    e = multiplier_entries(n, lam, b)
    det = e[0, 0] * e[1, 1] - e[0, 1] * e[1, 0]
    return SpectralMatrix(
        n=n,
        lam=lam,
        b=b,
        entries=e,
        det=float(det),
        discriminant=discriminant(n, b),
        roots=eigenvalues(n, b),
    )


def _radius_equation(b: float, m: int) -> float:
    return 1.0 + b**m - 0.5 * (1.0 - b * b) * m


def degenerate_radius(m: int, tol: float = 1e-14, max_iter: int = 200) -> float:
    """Unique root b_m in (0, 1) of 1 + b^m - m(1 - b^2)/2 = 0.

    The left-hand side is strictly increasing in b, so a bisection bracket on
    [1e-9, 1 - 1e-9] is safe; a few Newton steps polish the result.
    """
    if m < 3:
        raise ValueError(f"b_m is defined for m >= 3, got m={m}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = 1e-9, 1.0 - 1e-9
    # coarse bisection down to a safe Newton basin
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _radius_equation(mid, m) > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-6:
            break
    b = 0.5 * (lo + hi)
    for _ in range(max_iter):
        f = _radius_equation(b, m)
        df = m * b ** (m - 1) + m * b
        step = f / df
        b_new = b - step
        if not lo <= b_new <= hi:
            b_new = 0.5 * (lo + hi)
        if f > 0:
            hi = min(hi, b)
        else:
            lo = max(lo, b)
        b = b_new
        if abs(step) <= tol and abs(_radius_equation(b, m)) <= tol:
            return b
    raise RuntimeError(f"degenerate_radius({m}) did not reach tol={tol}")


class PointClass(enum.Enum):
    NON_DEGENERATE = "NonDegenerate"
    DEGENERATE_1D = "Degenerate1D"
    DEGENERATE_2D = "Degenerate2D"
    NO_EIGENVALUE = "NoEigenvalue"


def two_dimensional_kernel_index(b: float, cap: int = TWO_D_CAP, tol: float = TWO_D_MATCH_TOL) -> Optional[int]:
    """Return 2n if b matches b_{2n} (4 <= 2n <= cap), else None."""
    for k in range(4, cap + 1, 2):
        if abs(b - degenerate_radius(k)) <= tol:
            return k
    return None


def classify_point(m: int, b: float) -> PointClass:
    if not 0.0 < b < 1.0:
        raise ValueError(f"b must lie in (0, 1), got {b}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if m == 2:
        if two_dimensional_kernel_index(b) is not None:
            return PointClass.DEGENERATE_2D
        return PointClass.DEGENERATE_1D
    d = discriminant(m, b)
    if abs(d) < DEGENERATE_TOL:
        return PointClass.DEGENERATE_1D
    return PointClass.NON_DEGENERATE if d > 0 else PointClass.NO_EIGENVALUE


def det_M2m_factored(m: int, b: float) -> float:
    """det M_{2m}(lam_m) in factored form, valid at b = b_m."""
    bm = b**m
    return b * (bm + 1.0) ** 2 * (bm * bm - 2.0 * bm - 1.0)


def unified_degenerate_matrix(m: int, b: float) -> np.ndarray:
    eps = epsilon(m)
    return b**m * np.array([[-eps, b], [-1.0, eps * b]])


@dataclass(frozen=True)
class KernelVector:
    """Kernel direction (eps*b, 1) carried by the Laurent monomial w^{-(m-1)}."""

    components: Tuple[float, float]
    mode: int


def kernel_vector(m: int, b: float) -> KernelVector:
    return KernelVector(components=(epsilon(m) * b, 1.0), mode=m - 1)


def kernel_direction(n: int, lam: float, b: float) -> np.ndarray:
    """Unit null vector of M_n(lam), assuming lam is one of its roots."""
    e = multiplier_entries(n, lam, b)
    # second row is never identically zero (b^n != 0)
    v = np.array([e[1, 1], -e[1, 0]])
    return v / np.linalg.norm(v)


@dataclass
class AnnulusConfig:
    b: float
    m: int
    lambda_m: float = field(init=False)
    epsilon: int = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.b < 1.0:
            raise ValueError(f"b must lie in (0, 1), got {self.b}")
        if self.m < 2:
            raise ValueError(f"m must be >= 2, got {self.m}")
        self.lambda_m = degenerate_lambda(self.b)
        self.epsilon = epsilon(self.m)

    @property
    def point_class(self) -> PointClass:
        return classify_point(self.m, self.b)

    @property
    def kernel(self) -> KernelVector:
        return kernel_vector(self.m, self.b)

    @classmethod
    def degenerate(cls, m: int, b: Optional[float] = None) -> "AnnulusConfig":
        """Config on the degenerate set: any b for m = 2, b = b_m otherwise."""
        if m == 2:
            if b is None:
                raise ValueError("m = 2 needs an explicit b")
            return cls(b=b, m=2)
        return cls(b=degenerate_radius(m) if b is None else b, m=m)
