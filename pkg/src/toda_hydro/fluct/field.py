"""The dressed Levy-Chentsov field: covariance evaluation and sampling.

Cov(Z(p1), Z(p2)) pairs two dressed psi profiles, whose prefactors are
T^dr(., Lambda_i).  Those carry log singularities at Lambda_1, Lambda_2,
so the lambda integral runs on a mesh graded at both points (plus cuts at
every overlap kink); T^dr is evaluated off-node through its Nystrom
extension.  The field itself is defined for tau >= 0 only; negative times
are rejected rather than extended.
"""

from dataclasses import dataclass

import numpy as np

from ..kernels.grid import gauss_panels, refine_edges_at
from .covariance import _kink_lambdas, overlap_values

__all__ = ["lc_field_cov", "sample_field", "FieldSamplingError"]

_CLIP_LIMIT = 1e-6


class FieldSamplingError(RuntimeError):
    """Covariance matrix too indefinite to sample from."""


@dataclass(frozen=True)
class _HalfLines:
    u: float
    a: float
    b: float


def _check_point(kernels, p):
    lam, q, tau = (float(v) for v in p)
    lo, hi = kernels.grid.panel_edges[0], kernels.grid.panel_edges[-1]
    if not lo < lam < hi:
        raise ValueError("Lambda outside the grid range")
    if tau < 0:
        raise ValueError("the field is defined for tau >= 0 only")
    return lam, q, tau


def _half_lines(kernels, lam, q, tau):
    alpha = kernels.alpha
    v_at = float(kernels.dressed.v_eff_at(lam))
    kappa = (q - tau * v_at) / alpha
    return _HalfLines(u=kappa, a=kappa + tau * v_at / alpha, b=-tau / alpha)


def lc_field_cov(p1, p2, kernels):
    """Covariance of the limit field at two (Lambda, q, tau) points."""
    lam1, q1, tau1 = _check_point(kernels, p1)
    lam2, q2, tau2 = _check_point(kernels, p2)
    if tau1 == 0.0 or tau2 == 0.0:
        return 0.0
    dp = kernels.dressed
    r1 = _half_lines(kernels, lam1, q1, tau1)
    r2 = _half_lines(kernels, lam2, q2, tau2)
    kinks = _kink_lambdas(kernels, r1, r2)

    sol1 = kernels.t_solution(lam1)
    edges = refine_edges_at(kernels.grid.panel_edges, lam1, pad=1)
    if lam2 == lam1:
        sol2 = sol1
    else:
        sol2 = kernels.t_solution(lam2)
        edges = refine_edges_at(edges, lam2, pad=1)
    interior = [c for c in kinks if edges[0] < c < edges[-1]]
    if interior:
        edges = np.unique(np.concatenate((edges, np.asarray(interior))))
    y, w = gauss_panels(edges, kernels.grid.nodes_per_panel)

    t1 = sol1.evaluate(y)
    t2 = t1 if sol2 is sol1 else sol2.evaluate(y)
    ov = overlap_values(r1, r2, np.asarray(dp.v_eff_at(y), dtype=float))
    integral = float(np.dot(w, t1 * t2 * ov * kernels.rho_interp(y)))
    s0_prod = float(dp.s0_dr_at(lam1)) * float(dp.s0_dr_at(lam2))
    return integral / s0_prod


def field_covariance_matrix(points, kernels):
    """Full covariance matrix of the field on a point list."""
    pts = [tuple(float(v) for v in p) for p in points]
    n = len(pts)
    cov = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            cov[i, j] = cov[j, i] = lc_field_cov(pts[i], pts[j], kernels)
    return cov


def sample_field(points, seed, kernels, n_draws=1):
    """Joint Gaussian draws of the field at `points`, deterministic in seed.

    The covariance is factored by symmetric eigendecomposition; tiny
    negative eigenvalues (quadrature asymmetry) are clipped at zero, and
    the clipped mass is checked against the trace.
    """
    cov = field_covariance_matrix(points, kernels)
    vals, vecs = np.linalg.eigh(cov)
    clipped = float(-np.sum(vals[vals < 0]))
    trace = float(np.sum(np.abs(vals)))
    if trace > 0 and clipped > _CLIP_LIMIT * trace:
        raise FieldSamplingError(
            "clipped eigenvalue mass %.3e exceeds %.0e of the trace"
            % (clipped, _CLIP_LIMIT)
        )
    root = vecs * np.sqrt(np.maximum(vals, 0.0))[None, :]
    rng = np.random.Generator(np.random.Philox(key=int(seed) & (2**64 - 1)))
    g = rng.standard_normal((int(n_draws), len(points)))
    draws = g @ root.T
    return draws[0] if n_draws == 1 else draws
