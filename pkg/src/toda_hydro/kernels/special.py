"""Special functions used by the equilibrium kernels.

digamma/trigamma are implemented here from scratch (recurrence into the
asymptotic regime, then the Bernoulli series).  They certify acceptance
values elsewhere in the package, so they deliberately do not come from
scipy; the test suite checks them against independent references.
"""

import math

import numpy as np

__all__ = ["digamma", "trigamma", "mathfrak_F", "ell"]

# Floor for every pointwise evaluation of a log kernel.
EPS_LOG = 1e-12


def ell(x):
    """Regularized two-particle phase shift log: 0.5*log(x^2 + EPS_LOG^2)."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * np.log(x * x + EPS_LOG * EPS_LOG)
    return float(out) if out.ndim == 0 else out

# Asymptotic-series cutoff.  Above this the Bernoulli tails below are
# < 1e-16 relative; below it we shift up by recurrence.
_ASYMPTOTIC_EDGE = 10.0

# B_{2k}/(2k) for k = 1..7
_DIGAMMA_TAIL = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)

# B_{2k} for k = 1..7
_TRIGAMMA_TAIL = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
)


def digamma(x: float) -> float:
    """Logarithmic derivative of the gamma function, x > 0."""
    if x <= 0.0:
        raise ValueError("digamma defined here for positive arguments only")
    acc = 0.0
    while x < _ASYMPTOTIC_EDGE:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = 0.0
    power = inv2
    for coeff in _DIGAMMA_TAIL:
        tail += coeff * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x - tail


def trigamma(x: float) -> float:
    """Second logarithmic derivative of the gamma function, x > 0."""
    if x <= 0.0:
        raise ValueError("trigamma defined here for positive arguments only")
    acc = 0.0
    while x < _ASYMPTOTIC_EDGE:
        acc += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    tail = 0.0
    power = inv * inv2
    for coeff in _TRIGAMMA_TAIL:
        tail += coeff * power
        power *= inv2
    return acc + inv + 0.5 * inv2 + tail


def _gauss_nodes(p: int):
    t, w = np.polynomial.legendre.leggauss(p)
    return t, w


def _panel_nodes(edges: np.ndarray, p: int):
    """Composite Gauss-Legendre nodes/weights for consecutive [edges] panels."""
    t, w = _gauss_nodes(p)
    lo = edges[:-1][:, None]
    hi = edges[1:][:, None]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid + half * t[None, :]).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def _grading():
    """Panel layout for the oscillatory gamma-weight integral.

    [0, 1] after the u = y^theta substitution: geometric panels toward 0
    (the integrand is only finitely differentiable there when 1/theta is
    not an integer) and oscillation-resolving panels on [1/4, 1].
    [1, y_cut] in plain unit-fraction panels; y_cut = 10 puts the
    truncated tail below 3e-22.
    """
    geo = 0.25 * np.power(0.5, np.arange(35, -1, -1.0))
    inner = np.concatenate(([0.0], geo, np.linspace(0.25, 1.0, 16)[1:]))
    outer = np.linspace(1.0, 10.0, 13)
    return inner, outer


def mathfrak_F(theta: float, x) -> np.ndarray:
    """Oscillatory integral (theta/Gamma(theta))^(1/2) *
    int_0^inf y^(theta-1) exp(i x y - y^2/2) dy, vectorized over x.

    The [0, 1] part is computed after substituting u = y^theta, which
    removes the endpoint singularity of y^(theta-1); the rest uses
    composite panels out to where the Gaussian factor is negligible.
    Relative accuracy ~1e-12 for |x| <= 40.
    """
    if theta <= 0.0:
        raise ValueError("theta must be positive")
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_flat = np.atleast_1d(x_arr).ravel()

    inner_edges, outer_edges = _grading()
    u, wu = _panel_nodes(inner_edges, 20)
    y_in = u ** (1.0 / theta)
    # weight 1/theta from the substitution; exp(-y^2/2) kept explicit
    phase_in = np.exp(
        1j * np.outer(x_flat, y_in) - 0.5 * y_in**2
    )
    val = phase_in @ (wu / theta)

    y_out, wy = _panel_nodes(outer_edges, 24)
    dens_out = y_out ** (theta - 1.0) * np.exp(-0.5 * y_out**2)
    phase_out = np.exp(1j * np.outer(x_flat, y_out))
    val += phase_out @ (wy * dens_out)

    val *= math.sqrt(theta / math.gamma(theta))
    if scalar:
        return complex(val[0])
    return val.reshape(x_arr.shape)
