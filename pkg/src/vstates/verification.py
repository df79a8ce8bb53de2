"""Oracle suites comparing the quadrature/Newton pipeline with closed forms."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import closed_forms as cf
from .contour import QuadratureGrid, numeric_multiplier
from .reduction import complement_curvature, numeric_hessian, second_variation, third_variation_Q
from .spectral import AnnulusConfig, multiplier_entries

RESIDUE_MODES = range(1, 11)
RESIDUE_RADII = (0.2, 0.5, 0.8)
LINEARIZATION_SETTINGS = ((3, 0.5, 0.6), (2, 0.4, 0.7))
HESSIAN_POINTS = ((2, 0.4), (3, None), (4, None))


@dataclass
class Check:
    suite: str
    name: str
    value: float
    reference: float
    error: float
    tol: float
    passed: bool
    note: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.suite}:{self.name} value={self.value:.12g} ref={self.reference:.12g} err={self.error:.3e} tol={self.tol:.1e}"

    def as_row(self) -> list:
        d = asdict(self)
        return [d[k] for k in CHECK_COLUMNS]


CHECK_COLUMNS = ("suite", "name", "value", "reference", "error", "tol", "passed", "note")


def _failed(suite: str, name: str, exc: Exception) -> Check:
    return Check(suite, name, math.nan, math.nan, math.inf, 0.0, False, note=f"{type(exc).__name__}: {exc}")


def _cfg(m: int, b: Optional[float]) -> AnnulusConfig:
    return AnnulusConfig.degenerate(m, b)


def residues(grid: Optional[QuadratureGrid] = None, tol: float = 1e-10) -> List[Check]:
    grid = grid or QuadratureGrid(256)
    out = []
    for kind in ("pole1", "pole2", "pole3"):
        for m in RESIDUE_MODES:
            for b in RESIDUE_RADII:
                closed, quad = cf.residue_oracle(kind, m, b, grid)
                err = abs(closed - quad)
                out.append(Check("residues", f"{kind}/m={m}/b={b}", quad, closed, err, tol, err <= tol))
    return out


def linearization(
    settings: Sequence = LINEARIZATION_SETTINGS, modes: Iterable[int] = range(1, 5), h: float = 1e-5, tol: float = 1e-6, grid=None
) -> List[Check]:
    grid = grid or QuadratureGrid(256)
    out = []
    for m, b, lam in settings:
        for n in modes:
            name = f"m={m}/b={b}/lam={lam}/n={n}"
            try:
                num = numeric_multiplier(n, lam, b, m, grid, h=h, N=n, richardson=False)
            except Exception as exc:  # rendered as a failed check
                out.append(_failed("linearization", name, exc))
                continue
            exact = multiplier_entries(n * m, lam, b)
            floor = 1e-12 * np.abs(exact).max()
            rel = np.abs(num - exact) / np.maximum(np.abs(exact), floor)
            k = int(np.argmax(rel))
            out.append(
                Check("linearization", name, float(num.flat[k]), float(exact.flat[k]), float(rel.max()), tol, bool(rel.max() <= tol))
            )
    return out


def hessian(points: Sequence = HESSIAN_POINTS, tol: float = 1e-3, grid=None, N: int = 8) -> List[Check]:
    out = []
    for m, b in points:
        cfg = _cfg(m, b)
        tag = f"m={m}/b={cfg.b:.12g}"
        try:
            rep = numeric_hessian(cfg, grid, N)
        except Exception as exc:
            out.append(_failed("hessian", tag, exc))
            continue
        out.append(Check("hessian", f"{tag}/d_ll", rep.d_ll, rep.closed_form_ll, rep.rel_err[0], tol, rep.rel_err[0] <= tol))
        tl_err = abs(rep.d_tl) / abs(rep.d_ll)
        out.append(Check("hessian", f"{tag}/d_tl", rep.d_tl, 0.0, tl_err, 1e-4, tl_err <= 1e-4, note="|d_tl| / |d_ll|"))
        out.append(Check("hessian", f"{tag}/d_tt", rep.d_tt, rep.closed_form_tt, rep.rel_err[2], tol, rep.rel_err[2] <= tol))
        want = -1.0 if m == 2 else 1.0
        sign_ok = math.copysign(1.0, rep.d_tt) == want
        out.append(Check("hessian", f"{tag}/sign_tt", float(np.sign(rep.d_tt)), want, 0.0 if sign_ok else 1.0, 0.0, sign_ok))
    return out


def vtilde(points: Sequence = ((3, None), (2, 0.4)), tol: float = 1e-3, zero_tol: float = 1e-6, grid=None, N: int = 8) -> List[Check]:
    out = []
    for m, b in points:
        cfg = _cfg(m, b)
        tag = f"m={m}/b={cfg.b:.12g}"
        try:
            num = complement_curvature(cfg, grid, N)
        except Exception as exc:
            out.append(_failed("vtilde", tag, exc))
            continue
        ref = cf.vtilde(m, cfg.b)
        if ref.vanishes:
            err = float(np.abs(num).max())
            out.append(Check("vtilde", f"{tag}/zero", err, 0.0, err, zero_tol, err <= zero_tol))
        else:
            err = float(np.linalg.norm(num - ref.as_array()) / np.linalg.norm(ref.as_array()))
            out.append(Check("vtilde", tag, float(num[0]), ref.components[0], err, tol, err <= tol, note="vector relative error"))
    return out


def variations(points: Sequence = ((2, 0.4), (3, None), (4, None)), grid=None) -> List[Check]:
    """Second variation constant alpha_hat and the third derivative of Q G along v_m."""
    out = []
    for m, b in points:
        cfg = _cfg(m, b)
        tag = f"m={m}/b={cfg.b:.12g}"
        sv = second_variation(cfg, grid)
        a_ref = cf.alpha_hat(m, cfg.b)
        if a_ref == 0.0:
            err = float(np.abs(sv).max())
            out.append(Check("variations", f"{tag}/alpha", float(sv[0]), 0.0, err, 1e-8, err <= 1e-8))
        else:
            err = abs(sv[0] - a_ref) / abs(a_ref)
            out.append(Check("variations", f"{tag}/alpha", float(sv[0]), a_ref, err, 1e-5, err <= 1e-5))
        t3 = third_variation_Q(cfg, grid)
        t_ref = 3.0 * cf.third_derivative_coeff(m, cfg.b)
        err = abs(t3 - t_ref) / abs(t_ref)
        out.append(Check("variations", f"{tag}/third", t3, t_ref, err, 1e-2, err <= 1e-2))
    return out


SUITES: Dict[str, Callable[..., List[Check]]] = {
    "residues": residues,
    "linearization": linearization,
    "hessian": hessian,
    "vtilde": vtilde,
    "variations": variations,
}


def run(suites: Sequence[str]) -> List[Check]:
    out = []
    for s in suites:
        try:
            out.extend(SUITES[s]())
        except Exception as exc:
            out.append(_failed(s, "suite", exc))
    return out

