"""Lattice configuration and microscopic state containers."""

from dataclasses import dataclass

import numpy as np

__all__ = ["LatticeConfig", "TodaState", "ChargeField"]

_INTEGRATORS = ("verlet2", "yoshida4")


@dataclass(frozen=True)
class LatticeConfig:
    """Static parameters of one lattice ensemble.

    Sites live on the symmetric window [N1, N2] with N1 = -floor(N/2),
    N2 = N1 + N - 1; array index k maps to site N1 + k.
    """

    beta: float
    theta: float
    n_sites: int
    dt: float = 0.005
    integrator: str = "yoshida4"

    def __post_init__(self):
        if self.beta <= 0 or self.theta <= 0:
            raise ValueError("beta and theta must be positive")
        if self.n_sites < 2:
            raise ValueError("need at least two sites")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.integrator not in _INTEGRATORS:
            raise ValueError(
                "integrator must be one of %s" % (_INTEGRATORS,)
            )

    @property
    def n1(self):
        return -(self.n_sites // 2)

    @property
    def n2(self):
        return self.n1 + self.n_sites - 1

    def site_index(self, site):
        """Array index of a lattice site label."""
        if not self.n1 <= site <= self.n2:
            raise IndexError("site %d outside [%d, %d]" % (site, self.n1, self.n2))
        return site - self.n1


class TodaState:
    """Flaschka variables plus reconstructed positions at a time stamp.

    b and p are the same physical quantity; they alias the same array so
    the p = b invariant is exact by construction.  a has length N-1 (the
    boundary convention a_{N2} = 0 is implicit, never stored).
    """

    __slots__ = ("config", "a", "b", "q", "time")

    def __init__(self, config, a, b, q, time=0.0):
        self.config = config
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.q = np.asarray(q, dtype=float)
        self.time = float(time)
        n = config.n_sites
        if self.a.shape != (n - 1,) or self.b.shape != (n,) or self.q.shape != (n,):
            raise ValueError("state arrays do not match n_sites")
        if self.time < 0:
            raise ValueError("time must be nonnegative")

    @property
    def p(self):
        return self.b

    @property
    def n_sites(self):
        return self.config.n_sites

    def r(self):
        """Stretches r_i = q_{i+1} - q_i, indexed N1 .. N2-1."""
        return self.q[1:] - self.q[:-1]

    def copy(self):
        return TodaState(
            self.config, self.a.copy(), self.b.copy(), self.q.copy(), self.time
        )

    def validate(self, tol=1e-12):
        """Check the Flaschka consistency invariants; raises on failure."""
        if not np.all(self.a > 0):
            raise ValueError("off-diagonal variables must stay positive")
        expected = np.exp(-0.5 * self.r())
        rel = np.max(np.abs(self.a - expected) / expected)
        if rel > tol:
            raise ValueError(
                "a out of sync with positions (relative error %.3e)" % rel
            )
        return True


@dataclass
class ChargeField:
    """Values of one local charge across the window.

    For the modified order-zero charge the last site has no stretch; that
    entry is NaN on purpose so accidental use is loud.
    """

    m: int
    values: np.ndarray
    modified: bool

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("charge order must be nonnegative")
        self.values = np.asarray(self.values, dtype=float)
