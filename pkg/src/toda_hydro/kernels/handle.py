"""Bundled equilibrium kernel handles.

A KernelSet owns one (grid, profiles, dressed) triple plus lazy caches for
the dressed power functions and the T^dr solutions, which are the two
expensive objects everything downstream keeps asking for.  Instances are
immutable after construction and safe to share read-only across workers.
"""

import csv

import numpy as np

from .dressing import DressedProfiles, dress, operator_F
from .grid import QuadratureGrid
from .profiles import equilibrium_profiles
from .tdressed import t_dressed

__all__ = ["KernelSet", "export_kernels_csv"]

_CSV_COLUMNS = ("lambda", "rho_beta", "rho", "s0_dr", "s1_dr", "v_eff")


class KernelSet:
    def __init__(self, grid, profiles):
        self.grid = grid
        self.profiles = profiles
        self.dressed = DressedProfiles(grid, profiles)
        self._power_cache = {0: self.dressed.s0_dr, 1: self.dressed.s1_dr}
        self._f_cache = {}
        self._fi_cache = {}
        self._t_cache = {}
        self._rho_interp = grid.interpolant(profiles.rho)

    @classmethod
    def build(cls, beta, theta, lambda_max=None, n_panels=125,
              nodes_per_panel=16, dtheta=None):
        if lambda_max is None:
            lambda_max = 12.0 / float(beta) ** 0.5
        grid = QuadratureGrid(lambda_max, n_panels, nodes_per_panel)
        profiles = equilibrium_profiles(grid, beta, theta, dtheta)
        return cls(grid, profiles)

    @property
    def beta(self):
        return self.profiles.beta

    @property
    def theta(self):
        return self.profiles.theta

    @property
    def alpha(self):
        return self.profiles.alpha

    def s_dr(self, m):
        """Dressed power function (lambda^m)^dr at the nodes."""
        m = int(m)
        if m not in self._power_cache:
            self._power_cache[m] = dress(
                self.grid, self.profiles, self.grid.nodes ** m
            )
        return self._power_cache[m]

    def f_power(self, m):
        """F(lambda^m) at the nodes (dressing minus the s0_dr projection)."""
        m = int(m)
        if m not in self._f_cache:
            self._f_cache[m] = operator_F(
                self.grid, self.profiles, self.dressed, self.grid.nodes ** m
            )
        return self._f_cache[m]

    def f_power_interp(self, m):
        """Panel interpolant of f_power(m) for off-node evaluation."""
        m = int(m)
        if m not in self._fi_cache:
            self._fi_cache[m] = self.grid.interpolant(self.f_power(m))
        return self._fi_cache[m]

    def t_solution(self, lam):
        """Cached T^dr(., Lambda) composite-mesh solution."""
        key = float(lam)
        if key not in self._t_cache:
            self._t_cache[key] = t_dressed(self.grid, self.profiles, key)
        return self._t_cache[key]

    def rho_interp(self, x):
        return self._rho_interp(x)

    def to_csv(self, path):
        export_kernels_csv(self, path)


def export_kernels_csv(kernels, path):
    """Write the profile table with the canonical column layout."""
    grid = kernels.grid
    prof = kernels.profiles
    dp = kernels.dressed
    rows = np.column_stack(
        [grid.nodes, prof.rho_beta, prof.rho, dp.s0_dr, dp.s1_dr, dp.v_eff]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for row in rows:
            writer.writerow(["%.17g" % v for v in row])
