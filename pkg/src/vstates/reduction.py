"""Numerical Lyapunov-Schmidt reduction at a one-dimensional degenerate point.

Coordinates near (lam_m, annulus):

    f = t v_m + k,   v_m = (eps b, 1) w^{-(m-1)},
    k = alpha (1, 0) w^{-(m-1)} + sum_{n >= 2} A_n w^{-(nm-1)}.

The residual of G splits along the cokernel direction W = (1, -eps)/sqrt(2) on the
first mode (the Q part) and everything else (the range part, here the direction
(eps, 1)/sqrt(2) on mode one plus all higher modes).  Newton solves the range part
for k, and the reduced function is F2(lam, t) = Q G(lam, t v_m + k) / t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from . import closed_forms as cf
from .contour import FunctionalValue, QuadratureGrid, VStateCoeffs, eval_G
from .spectral import AnnulusConfig, epsilon

NEWTON_TOL = 1e-11
NEWTON_CAP = 25
JACOBIAN_STEP = 1e-7
POLISH_TOL = 1e-14
HESSIAN_STEPS = (1e-3, 5e-4)
LINEARIZATION_STEP = 1e-4


class NoConvergence(RuntimeError):
    """Newton left its contraction neighbourhood or hit the iteration cap."""

    def __init__(self, message: str, residual: float = math.nan, iterations: int = 0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


def project_Q(fv, m: int, eps: Optional[int] = None) -> float:
    """Coordinate of the mode-one coefficient pair along W = (1, -eps)/sqrt(2).

    ``fv`` is a FunctionalValue or the pair (B_{1,1}, B_{2,1}).
    """
    eps = epsilon(m) if eps is None else eps
    b1 = fv.mode(1) if isinstance(fv, FunctionalValue) else np.asarray(fv, dtype=float)
    return float((b1[0] - eps * b1[1]) / math.sqrt(2.0))


def _range_coordinate(b1, eps: int) -> float:
    return float((eps * b1[0] + b1[1]) / math.sqrt(2.0))


@dataclass(frozen=True)
class ReducedSample:
    lam: float
    t: float
    f2: float
    k_norm: float
    newton_iters: int
    residual: float


@dataclass
class ComplementSolution:
    """Complement part k (a2 mode-one slot is identically zero) plus solver diagnostics."""

    k: VStateCoeffs
    x: np.ndarray
    q: float
    residual: float
    iterations: int

    @property
    def alpha(self) -> float:
        return float(self.k.a1[0])

    def mode(self, n: int) -> np.ndarray:
        return np.array([self.k.a1[n - 1], self.k.a2[n - 1]])


class Reduction:
    """Range equations and Q projection for one (m, b) degenerate configuration."""

    def __init__(self, cfg: AnnulusConfig, grid: Optional[QuadratureGrid] = None, N: int = 8):
        if N < 2:
            raise ValueError(f"need N >= 2 Laurent modes, got {N}")
        self.cfg = cfg
        self.grid = grid or QuadratureGrid()
        self.N = N
        self.eps = cfg.epsilon
        self.size = 2 * N - 1

    def complement(self, x) -> VStateCoeffs:
        N = self.N
        a1 = np.zeros(N)
        a2 = np.zeros(N)
        a1[0] = x[0]
        a1[1:] = x[1:N]
        a2[1:] = x[N:]
        return VStateCoeffs(m=self.cfg.m, b=self.cfg.b, a1=a1, a2=a2)

    def full(self, x, t: float) -> VStateCoeffs:
        c = self.complement(x)
        c.a1[0] += t * self.eps * self.cfg.b
        c.a2[0] += t
        return c

    def residual(self, x, lam: float, t: float) -> Tuple[np.ndarray, float]:
        fv = eval_G(self.full(x, t), lam, self.grid)
        b1 = fv.mode(1)
        eqs = np.concatenate([[_range_coordinate(b1, self.eps)], fv.g1[1:], fv.g2[1:]])
        return eqs, project_Q(b1, self.cfg.m, self.eps)

    def jacobian(self, x, lam: float, t: float, base: np.ndarray) -> np.ndarray:
        J = np.empty((self.size, self.size))
        for k in range(self.size):
            xp = x.copy()
            xp[k] += JACOBIAN_STEP
            J[:, k] = (self.residual(xp, lam, t)[0] - base) / JACOBIAN_STEP
        return J

    def solve(self, lam: float, t: float, x0=None, tol: float = NEWTON_TOL, cap: int = NEWTON_CAP) -> ComplementSolution:
        x = np.zeros(self.size) if x0 is None else np.array(x0, dtype=float)
        F, q = self.residual(x, lam, t)
        res = float(np.abs(F).max())
        it = 0
        # iterate past tol while it still pays off, so differentiated samples stay clean
        while res > POLISH_TOL and it < cap:
            J = self.jacobian(x, lam, t, F)
            try:
                step = np.linalg.solve(J, F)
            except np.linalg.LinAlgError as exc:
                raise NoConvergence(f"singular complement Jacobian at lam={lam}, t={t}", res, it) from exc
            x_new = x - step
            F_new, q_new = self.residual(x_new, lam, t)
            res_new = float(np.abs(F_new).max())
            it += 1
            if res <= tol and res_new >= 0.5 * res:
                break
            x, F, q, res = x_new, F_new, q_new, res_new
        if not res <= tol:
            raise NoConvergence(f"complement Newton stalled at residual {res:.3e} (lam={lam}, t={t})", res, it)
        return ComplementSolution(k=self.complement(x), x=x, q=q, residual=res, iterations=it)

    def linear_limit(self, lam: float, h: float = LINEARIZATION_STEP) -> float:
        """lim_{t -> 0} Q G(lam, t v + k(t)) / t from the linearization at the annulus."""

        def derivs(step):
            cols = np.empty((self.size + 1, self.size + 1))
            zero = np.zeros(self.size)
            for k in range(self.size + 1):
                if k < self.size:
                    dx = zero.copy()
                    dx[k] = step
                    plus, minus = (dx, 0.0), (-dx, 0.0)
                else:
                    plus, minus = (zero, step), (zero, -step)
                Fp, qp = self.residual(plus[0], lam, plus[1])
                Fm, qm = self.residual(minus[0], lam, minus[1])
                cols[:, k] = (np.append(Fp, qp) - np.append(Fm, qm)) / (2.0 * step)
            return cols

        D = (4.0 * derivs(h / 2) - derivs(h)) / 3.0
        Jx, Jt = D[: self.size, : self.size], D[: self.size, self.size]
        psi = np.linalg.solve(Jx, -Jt)
        return float(D[self.size, self.size] + D[self.size, : self.size] @ psi)


def solve_complement(lam: float, t: float, cfg: AnnulusConfig, grid: Optional[QuadratureGrid] = None, N: int = 8, x0=None):
    """Solve (Id - Q) G(lam, t v_m + k) = 0 for k; returns (k, diagnostics)."""
    sol = Reduction(cfg, grid, N).solve(lam, t, x0=x0)
    return sol.k, sol


def eval_F2(lam: float, t: float, cfg: AnnulusConfig, grid: Optional[QuadratureGrid] = None, N: int = 8, red: Optional[Reduction] = None) -> ReducedSample:
    """Reduced scalar function; at t = 0 the removable value is taken from the linearization."""
    red = red or Reduction(cfg, grid, N)
    if t == 0.0:
        return ReducedSample(lam=lam, t=0.0, f2=red.linear_limit(lam), k_norm=0.0, newton_iters=0, residual=0.0)
    sol = red.solve(lam, t)
    return ReducedSample(
        lam=lam,
        t=t,
        f2=sol.q / t,
        k_norm=float(np.linalg.norm(sol.x)),
        newton_iters=sol.iterations,
        residual=sol.residual,
    )


@dataclass
class HessianReport:
    d_lambda: float
    d_t: float
    d_ll: float
    d_tl: float
    d_tt: float
    steps: Tuple[float, float]
    closed_form_ll: float
    closed_form_tl: float
    closed_form_tt: float
    rel_err: Tuple[float, float, float] = field(init=False)

    def __post_init__(self):
        def rel(num, closed):
            return abs(num - closed) / max(1.0, abs(closed))

        self.rel_err = (
            rel(self.d_ll, self.closed_form_ll),
            rel(self.d_tl, self.closed_form_tl),
            rel(self.d_tt, self.closed_form_tt),
        )

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(np.array([[self.d_ll, self.d_tl], [self.d_tl, self.d_tt]]))


def _stencil(f, h):
    f00 = f(0, 0)
    fp0, fm0 = f(h, 0), f(-h, 0)
    f0p, f0m = f(0, h), f(0, -h)
    fpp, fpm, fmp, fmm = f(h, h), f(h, -h), f(-h, h), f(-h, -h)
    return np.array(
        [
            (fp0 - fm0) / (2 * h),
            (f0p - f0m) / (2 * h),
            (fp0 - 2 * f00 + fm0) / h**2,
            (fpp - fpm - fmp + fmm) / (4 * h * h),
            (f0p - 2 * f00 + f0m) / h**2,
        ]
    )


def numeric_hessian(
    cfg: AnnulusConfig,
    grid: Optional[QuadratureGrid] = None,
    N: int = 8,
    h_lambda: float = HESSIAN_STEPS[0],
    h_t: Optional[float] = None,
) -> HessianReport:
    """Central-difference derivatives of F2 at (lam_m, 0), Richardson over (h, h/2).

    A single step h = h_lambda is used in both directions; h_t, if given, must equal it.
    """
    if h_t is not None and h_t != h_lambda:
        raise ValueError("the stencil uses a square step; pass h_t == h_lambda")
    red = Reduction(cfg, grid, N)
    lam0 = cfg.lambda_m
    cache = {}

    def f(dl, dt):
        key = (dl, dt)
        if key not in cache:
            cache[key] = eval_F2(lam0 + dl, dt, cfg, red=red).f2
        return cache[key]

    h = h_lambda
    est = (4.0 * _stencil(f, h / 2) - _stencil(f, h)) / 3.0
    d_ll_c, d_tl_c, d_tt_c = cf.hessian_closed(cfg.m, cfg.b)
    return HessianReport(
        d_lambda=float(est[0]),
        d_t=float(est[1]),
        d_ll=float(est[2]),
        d_tl=float(est[3]),
        d_tt=float(est[4]),
        steps=(h, h / 2),
        closed_form_ll=d_ll_c,
        closed_form_tl=d_tl_c,
        closed_form_tt=d_tt_c,
    )


def calibration_factor(grid: Optional[QuadratureGrid] = None, N: int = 8) -> float:
    """closed / numeric d_ll at (3, b_3); fixed once and expected to be 1."""
    rep = numeric_hessian(AnnulusConfig.degenerate(3), grid, N)
    return rep.closed_form_ll / rep.d_ll


def _kernel_coeffs(cfg: AnnulusConfig, N: int, t: float) -> VStateCoeffs:
    c = VStateCoeffs.annulus(cfg.m, cfg.b, N)
    c.a1[0] = t * cfg.epsilon * cfg.b
    c.a2[0] = t
    return c


def second_variation(cfg: AnnulusConfig, grid: Optional[QuadratureGrid] = None, N: int = 4, h: float = 1e-2) -> np.ndarray:
    """Mode-2m coefficient pair of d^2 G(lam_m, 0)[v_m, v_m], Richardson over (h, h/2)."""
    grid = grid or QuadratureGrid()

    def second(s):
        gp = eval_G(_kernel_coeffs(cfg, N, s), cfg.lambda_m, grid).mode(2)
        g0 = eval_G(_kernel_coeffs(cfg, N, 0.0), cfg.lambda_m, grid).mode(2)
        gm = eval_G(_kernel_coeffs(cfg, N, -s), cfg.lambda_m, grid).mode(2)
        return (gp - 2.0 * g0 + gm) / s**2

    return (4.0 * second(h / 2) - second(h)) / 3.0


def third_variation_Q(cfg: AnnulusConfig, grid: Optional[QuadratureGrid] = None, N: int = 4, h: float = 1e-2) -> float:
    """d^3/dt^3 of Q G(lam_m, t v_m) at t = 0 by the five-point central third difference."""
    grid = grid or QuadratureGrid()

    def q(s):
        return project_Q(eval_G(_kernel_coeffs(cfg, N, s), cfg.lambda_m, grid), cfg.m, cfg.epsilon)

    return (q(2 * h) - 2 * q(h) + 2 * q(-h) - q(-2 * h)) / (2 * h**3)


def complement_curvature(
    cfg: AnnulusConfig, grid: Optional[QuadratureGrid] = None, N: int = 8, t: float = 1e-2
) -> np.ndarray:
    """Estimate of v~_m from the mode-two part of k(t) ~ (t^2 / 2) v~_m, Richardson over (t, t/2)."""
    red = Reduction(cfg, grid, N)

    def curv(s):
        return 2.0 * red.solve(cfg.lambda_m, s).mode(2) / s**2

    return (4.0 * curv(t / 2) - curv(t)) / 3.0
