"""The dressed log kernel T^dr(., Lambda) and the tracer diffusivity.

T^dr(., Lambda) solves the dressing equation whose right-hand side is the
two-particle shift 2 log|. - Lambda|.  The solution keeps that log
singularity, so the plain nodal Nystrom solve on the standard grid is not
enough: the panels around Lambda are replaced by a geometrically graded
mesh and the composite system is solved by block iteration, using the
cached standard factorization as a preconditioner.  Writing

    T^dr = 2 l(. - Lambda) + u

the correction u = theta T(rho_beta T^dr) is smooth except for a mild
kink at Lambda, and u is represented on standard-plus-graded nodes with
every integral evaluated by product integration on that composite mesh.
"""

import math

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .dressing import _factorization
from .grid import gauss_panels, refine_edges_at
from .special import ell

__all__ = ["TDressedSolution", "t_dressed", "T_dressed", "diffusivity"]

_REFINE_LEVELS = 30
_MAX_SWEEPS = 8
_SWEEP_TOL = 1e-13


class TDressedSolution:
    """T^dr(., Lambda) on the composite (standard + graded) mesh."""

    def __init__(self, grid, profiles, lam):
        self.grid = grid
        self.profiles = profiles
        self.Lambda = float(lam)

        edges = grid.panel_edges
        p = grid.nodes_per_panel
        theta = profiles.theta
        lu_std, _ = _factorization(grid, profiles)

        j = int(np.searchsorted(edges, self.Lambda) - 1)
        j = min(max(j, 0), grid.n_panels - 1)
        j0 = max(j - 1, 0)
        j1 = min(j + 2, grid.n_panels)
        refined = refine_edges_at(edges, self.Lambda, levels=_REFINE_LEVELS, pad=1)
        # The replaced span [edges[j0], edges[j1]] owns everything inserted.
        lo, hi = edges[j0], edges[j1]
        eps = 1e-12 * (edges[-1] - edges[0])
        self.sub_edges = refined[(refined >= lo - eps) & (refined <= hi + eps)]
        self._keep = (j0, j1)

        self.y_sub, self.w_sub = gauss_panels(self.sub_edges, p)
        keep_cols = np.ones(grid.size, dtype=bool)
        keep_cols[j0 * p : j1 * p] = False
        self._keep_cols = keep_cols

        tl_std = 2.0 * ell(grid.nodes - self.Lambda)
        tl_sub = 2.0 * ell(self.y_sub - self.Lambda)
        rho_sub = profiles.rho_beta_at(self.y_sub)
        rho_keep = profiles.rho_beta[keep_cols]

        w_std_sub = grid.weights_at(grid.nodes, self.sub_edges)
        w_sub_sub = grid.weights_at(self.y_sub, self.sub_edges)
        w_sub_keep = self._keep_weights(self.y_sub)
        wk = grid.log_kernel[:, keep_cols]

        if theta == 0:
            self.u_std = np.zeros(grid.size)
            self.u_sub = np.zeros(len(self.y_sub))
            self.sweeps = 0
            self.residual = 0.0
        else:
            a_sub = (-2.0 * theta) * (w_sub_sub * rho_sub[None, :])
            a_sub[np.diag_indices_from(a_sub)] += 1.0
            lu_sub = lu_factor(a_sub)

            g_tl_keep = rho_keep * tl_std[keep_cols]
            g_tl_sub = rho_sub * tl_sub
            u = lu_solve(
                lu_std, 2.0 * theta * (wk @ g_tl_keep + w_std_sub @ g_tl_sub)
            )
            residual = math.inf
            sweeps = 0
            u_sub = np.zeros(len(self.y_sub))
            for sweeps in range(1, _MAX_SWEEPS + 1):
                g_keep = rho_keep * (tl_std[keep_cols] + u[keep_cols])
                u_sub = lu_solve(
                    lu_sub,
                    2.0 * theta * (w_sub_keep @ g_keep + w_sub_sub @ g_tl_sub),
                )
                resid = (
                    2.0 * theta
                    * (wk @ g_keep + w_std_sub @ (g_tl_sub + rho_sub * u_sub))
                    - u
                )
                u = u + lu_solve(lu_std, resid)
                residual = float(np.max(np.abs(resid)))
                if residual < _SWEEP_TOL * max(1.0, float(np.max(np.abs(u)))):
                    break
            g_keep = rho_keep * (tl_std[keep_cols] + u[keep_cols])
            u_sub = lu_solve(
                lu_sub,
                2.0 * theta * (w_sub_keep @ g_keep + w_sub_sub @ g_tl_sub),
            )
            self.u_std = u
            self.u_sub = u_sub
            self.sweeps = sweeps
            self.residual = residual

        self.nodes_value = tl_std + self.u_std
        self.sub_value = tl_sub + self.u_sub
        self._g_keep = rho_keep * self.nodes_value[keep_cols]
        self._g_sub = rho_sub * self.sub_value

    def _keep_weights(self, targets):
        """Product-integration weights over the non-replaced standard panels."""
        edges = self.grid.panel_edges
        j0, j1 = self._keep
        blocks = []
        if j0 > 0:
            blocks.append(self.grid.weights_at(targets, edges[: j0 + 1]))
        if j1 < self.grid.n_panels:
            blocks.append(self.grid.weights_at(targets, edges[j1:]))
        return np.hstack(blocks) if blocks else np.zeros((len(targets), 0))

    def evaluate(self, x):
        """Nystrom extension of T^dr(., Lambda) to arbitrary points."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xf = np.atleast_1d(x).astype(float)
        tl = 2.0 * ell(xf - self.Lambda)
        if self.profiles.theta == 0:
            out = tl
        else:
            wkeep = self._keep_weights(xf)
            wsub = self.grid.weights_at(xf, self.sub_edges)
            out = tl + 2.0 * self.profiles.theta * (
                wkeep @ self._g_keep + wsub @ self._g_sub
            )
        return float(out[0]) if scalar else out

    def integrate(self, keep_factor, sub_factor):
        """Composite-mesh integral of T^dr * factor (factors at mesh nodes)."""
        keep = self._keep_cols
        val = np.dot(
            self.grid.weights[keep], self.nodes_value[keep] * keep_factor
        )
        val += np.dot(self.w_sub, self.sub_value * sub_factor)
        return float(val)

    def integrate_squared(self, keep_factor, sub_factor):
        """Composite-mesh integral of (T^dr)^2 * factor."""
        keep = self._keep_cols
        val = np.dot(
            self.grid.weights[keep], self.nodes_value[keep] ** 2 * keep_factor
        )
        val += np.dot(self.w_sub, self.sub_value**2 * sub_factor)
        return float(val)


def t_dressed(grid, profiles, lam):
    """Solve for T^dr(., Lambda); returns the composite-mesh solution."""
    lo, hi = grid.panel_edges[0], grid.panel_edges[-1]
    if not lo < lam < hi:
        raise ValueError("Lambda outside the grid range")
    return TDressedSolution(grid, profiles, lam)


def T_dressed(grid, profiles, lam):
    """T^dr(lambda_i, Lambda) at the standard nodes."""
    return t_dressed(grid, profiles, lam).nodes_value


def diffusivity(grid, profiles, dressed, lam, solution=None):
    """Tracer diffusivity D(Lambda) around the effective-velocity ray.

    |alpha|^-1 s0dr(Lambda)^-2 int |T^dr(l, Lambda)|^2 |v(l) - v(Lambda)| rho(l) dl,
    integrated on the graded composite mesh (the |v - v(Lambda)| factor
    vanishes linearly at Lambda, which tames the squared log there).
    """
    sol = solution if solution is not None else t_dressed(grid, profiles, lam)
    keep = sol._keep_cols
    v_lam = float(dressed.v_eff_at(lam))
    keep_factor = np.abs(dressed.v_eff[keep] - v_lam) * profiles.rho[keep]
    sub_factor = np.abs(
        np.asarray(dressed.v_eff_at(sol.y_sub), dtype=float) - v_lam
    ) * profiles.rho_at(sol.y_sub)
    integral = sol.integrate_squared(keep_factor, sub_factor)
    s0 = float(dressed.s0_dr_at(lam))
    if not math.isfinite(profiles.alpha):
        return 0.0
    return integral / (abs(profiles.alpha) * s0 * s0)
