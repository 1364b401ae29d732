"""Asymptotic scattering relation for quasi-particle trajectories."""

import numpy as np

from ..kernels.special import EPS_LOG

__all__ = ["scattering_residual"]

_BLOCK = 256


def scattering_residual(frame0, frame_t, spec, t, eps_log=EPS_LOG):
    """Deviation of each quasi-particle from its scattering prediction.

    residual_k = Q_k(t) - Q_k(0) - lambda_k t
                 - 2 sum_{j != k} l(lambda_k - lambda_j)
                   (1{Q_j(0) < Q_k(0)} - 1{Q_j(t) < Q_k(t)})

    with l(x) = log sqrt(x^2 + eps_log^2).  Work is blocked over k so the
    pairwise log matrix never materializes at full N x N size.
    """
    if frame0.n != frame_t.n or frame0.n != spec.n:
        raise ValueError("frames and spectrum must share one size")
    lam = spec.eigenvalues
    q0 = frame0.Q
    qt = frame_t.Q
    n = lam.shape[0]
    eps_sq = eps_log * eps_log
    out = np.empty(n)
    for lo in range(0, n, _BLOCK):
        hi = min(lo + _BLOCK, n)
        dl = lam[lo:hi, None] - lam[None, :]
        ell = 0.5 * np.log(dl * dl + eps_sq)
        swap = (q0[None, :] < q0[lo:hi, None]).astype(float)
        swap -= qt[None, :] < qt[lo:hi, None]
        swap[:, lo:hi][np.eye(hi - lo, dtype=bool)] = 0.0
        out[lo:hi] = 2.0 * np.einsum("kj,kj->k", ell, swap)
    return qt - q0 - lam * t - out
