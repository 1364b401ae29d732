"""Experiment configuration and ensemble statistics containers."""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..lattice import LatticeConfig

__all__ = ["EnsembleStats", "ExperimentConfig", "WindowError", "stats_from_samples", "variance_stats"]

_EXPERIMENTS = (
    "dos",
    "stretch",
    "linstat",
    "twopoint",
    "current",
    "tracer",
    "q0",
    "conservation",
    "scattering",
)


class WindowError(ValueError):
    """The requested space-time scale does not fit in the bulk window."""


@dataclass(frozen=True)
class ExperimentConfig:
    lattice: LatticeConfig
    experiment: str
    T_scale: float = 64.0
    tau_list: Sequence[float] = (1.0,)
    m_list: Sequence[int] = (1,)
    q_list: Sequence[float] = (0.0,)
    ensemble_size: int = 100
    bulk_fraction: float = 0.5
    base_seed: int = 0

    def __post_init__(self):
        if self.experiment not in _EXPERIMENTS:
            raise ValueError("unknown experiment %r" % (self.experiment,))
        if self.T_scale <= 0:
            raise ValueError("T_scale must be positive")
        if not 0 < self.bulk_fraction <= 1:
            raise ValueError("bulk_fraction must lie in (0, 1]")
        if self.ensemble_size < 1:
            raise ValueError("ensemble_size must be positive")
        if any(t < 0 for t in self.tau_list):
            raise ValueError("tau values must be nonnegative")

    def bulk_slice(self):
        """Central bulk window as an array-index slice."""
        n = self.lattice.n_sites
        nb = max(int(round(n * self.bulk_fraction)), 1)
        lo = (n - nb) // 2
        return slice(lo, lo + nb)

    def check_window(self, v_bound, alpha, extra_sites=0.0):
        """Require the light cone from the bulk not to reach the boundary.

        v_bound is the velocity bound in position units, alpha converts to
        sites; extra_sites accounts for observable support.
        """
        margin = self.bulk_slice().start
        tau_max = max(self.tau_list) if self.tau_list else 0.0
        needed = self.T_scale * tau_max * v_bound / abs(alpha) + extra_sites
        if margin < needed:
            raise WindowError(
                "bulk margin %d sites cannot absorb a light cone of %.0f "
                "sites; increase n_sites or shrink T_scale"
                % (margin, math.ceil(needed))
            )


@dataclass(frozen=True)
class EnsembleStats:
    """One observable's Monte Carlo summary.

    std_error = sqrt(variance / count) exactly, and when predicted is set
    z_score = (mean - predicted) / std_error.
    """

    id: str
    mean: float
    variance: float
    std_error: float
    count: int
    predicted: Optional[float] = None
    z_score: Optional[float] = None


def stats_from_samples(obs_id, samples, predicted=None):
    """EnsembleStats of a 1-D per-sample array, fixed reduction order."""
    x = np.asarray(samples, dtype=float)
    n = x.size
    mean = float(np.sum(x) / n)
    if n > 1:
        var = float(np.sum((x - mean) ** 2) / (n - 1))
    else:
        var = 0.0
    se = math.sqrt(var / n)
    z = None
    if predicted is not None:
        if se > 0:
            z = float((mean - predicted) / se)
        elif mean == predicted:
            z = 0.0
        else:
            z = math.copysign(math.inf, mean - predicted)
    return EnsembleStats(obs_id, mean, var, se, n, predicted, z)


def variance_stats(obs_id, values, scale=1.0, predicted=None):
    """Stats whose target is the *variance* of a per-sample observable.

    The reported mean is the unbiased variance estimate divided by scale,
    obtained as the ensemble mean of centered squares, so the EnsembleStats
    arithmetic identities (and the standard error of the variance estimate)
    come from the same per-sample reduction as any other observable.
    """
    x = np.asarray(values, dtype=float)
    n = x.size
    center = float(np.sum(x) / n)
    y = (x - center) ** 2 * (n / ((n - 1) * scale))
    return stats_from_samples(obs_id, y, predicted)
