"""Indicator-difference profiles entering the white-noise covariances.

Both families have the shape c(lambda) * (1{r < u} - 1{r < w(lambda)})
(half-lines flip together when alpha < 0, which leaves every product
integral unchanged), with u constant and w affine in v_eff(lambda).  That
structure is what makes the r-integration exact: the product of two such
profiles integrates to a signed interval-overlap length per lambda.
"""

from dataclasses import dataclass

__all__ = ["IndicatorProfile", "CovarianceQuery"]


@dataclass(frozen=True)
class IndicatorProfile:
    kind: str  # "psi" or "phi_m"
    tau: float
    m: int = 0
    q: float = 0.0
    q_prime: float = 0.0
    Lambda: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        if self.kind not in ("psi", "phi_m"):
            raise ValueError("kind must be 'psi' or 'phi_m'")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        if self.kind == "phi_m" and self.m < 0:
            raise ValueError("charge order m must be nonnegative")

    @staticmethod
    def phi(m, q, q_prime, tau):
        return IndicatorProfile(
            kind="phi_m", tau=float(tau), m=int(m), q=float(q), q_prime=float(q_prime)
        )

    @staticmethod
    def psi(Lambda, kappa, tau):
        return IndicatorProfile(
            kind="psi", tau=float(tau), Lambda=float(Lambda), kappa=float(kappa)
        )


@dataclass(frozen=True)
class CovarianceQuery:
    left: IndicatorProfile
    right: IndicatorProfile
    dressed: bool = False
