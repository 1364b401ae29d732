"""Deterministic per-sample seed streams.

Sample i of an ensemble gets splitmix64(base_seed + (i+1) * golden), a
64-bit mix that decorrelates consecutive indices; the result keys the
counter-based generator inside sample_equilibrium.  The stream depends
only on (base_seed, i), never on worker layout.
"""

__all__ = ["sample_seed"]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def sample_seed(base_seed, index):
    z = (base_seed + (index + 1) * _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK
