"""Thermal Toda lattice laboratory.

Microscopic dynamics in Flaschka variables, quasi-particle extraction
from the tridiagonal flow matrix, the hydrodynamic dressing kernels,
their Gaussian fluctuation predictions, and Monte Carlo harnesses that
compare the two.
"""

__version__ = "0.1.0"
