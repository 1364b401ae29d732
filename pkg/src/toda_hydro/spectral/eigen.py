"""Spectrum of the tridiagonal Lax matrix."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal, eigvalsh_tridiagonal

__all__ = ["EigenConvergenceError", "Spectrum", "eigendecompose"]


class EigenConvergenceError(RuntimeError):
    """The tridiagonal eigensolver hit its iteration cap."""


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted descending; eigenvector column j pairs with
    eigenvalue j when vectors were requested."""

    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray]

    @property
    def n(self):
        return self.eigenvalues.shape[0]

    def validate(self, a, b, tol=1e-10):
        """Residual and orthonormality invariants against the matrix data."""
        lam = self.eigenvalues
        if np.any(np.diff(lam) > 0):
            raise ValueError("eigenvalues must be sorted descending")
        if self.eigenvectors is None:
            return True
        u = self.eigenvectors
        res = np.empty_like(lam)
        lu = b[:, None] * u
        lu[:-1] += a[:, None] * u[1:]
        lu[1:] += a[:, None] * u[:-1]
        res = np.linalg.norm(lu - lam[None, :] * u, axis=0)
        if np.any(res > tol * (1.0 + np.abs(lam))):
            raise ValueError("eigen-residual above tolerance")
        gram = u.T @ u - np.eye(self.n)
        if np.max(np.abs(gram)) > tol:
            raise ValueError("eigenvectors not orthonormal to tolerance")
        return True


def eigendecompose(state, vectors=True, method="ql"):
    """Full spectrum of the Lax matrix of a state.

    Eigenvalue-only calls use implicit-shift QL by default; method="bisect"
    selects Sturm-count bisection instead (slower, independently derived).
    Vector calls always take the accumulating implicit-shift path.
    """
    if method not in ("ql", "bisect"):
        raise ValueError("method must be 'ql' or 'bisect'")
    try:
        if vectors:
            lam, u = eigh_tridiagonal(state.b, state.a, check_finite=False)
            order = np.argsort(lam, kind="stable")[::-1]
            return Spectrum(lam[order], np.ascontiguousarray(u[:, order]))
        lam = eigvalsh_tridiagonal(
            state.b, state.a, check_finite=False,
            lapack_driver="sterf" if method == "ql" else "stebz",
        )
        return Spectrum(lam[::-1].copy(), None)
    except LinAlgError as exc:
        raise EigenConvergenceError(
            "tridiagonal eigensolver failed to converge: %s" % exc
        ) from exc
