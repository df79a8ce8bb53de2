"""Doubly-connected rotating vortex patches near the annulus: spectral data,
boundary functional, Lyapunov-Schmidt reduction and branch continuation."""

from .spectral import AnnulusConfig, PointClass, classify_point, degenerate_radius, discriminant, eigenvalues, epsilon
from .contour import QuadratureGrid, VStateCoeffs, eval_G, eval_I, eval_map
from .reduction import eval_F2, numeric_hessian, project_Q, solve_complement
from .continuation import branch_from_eigenvalue, branch_transcritical, emit_diagram, no_bifurcation_scan

__version__ = "0.1.0"
