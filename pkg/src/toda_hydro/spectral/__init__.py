from .eigen import EigenConvergenceError, Spectrum, eigendecompose
from .frames import QuasiFrame, localization_bijection, quasiparticles
from .scattering import scattering_residual

__all__ = [
    "EigenConvergenceError",
    "QuasiFrame",
    "Spectrum",
    "eigendecompose",
    "localization_bijection",
    "quasiparticles",
    "scattering_residual",
]
