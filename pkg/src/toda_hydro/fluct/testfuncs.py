"""Compactly supported test functions with serializable descriptors.

Two families cover everything the scaling-limit checks need: a C2 cubic
B-spline bump and a Gaussian truncated at eight sigma.  Descriptors are
plain dicts so experiment configs can carry them through JSON.
"""

import numpy as np

__all__ = ["CubicBump", "PlateauBump", "TruncatedGaussian", "from_descriptor"]


class CubicBump:
    """Cubic B-spline bump: support [center - 2h, center + 2h], peak 1."""

    def __init__(self, center=0.0, halfwidth=1.0, amplitude=1.0):
        if halfwidth <= 0:
            raise ValueError("halfwidth must be positive")
        self.center = float(center)
        self.halfwidth = float(halfwidth)
        self.amplitude = float(amplitude)

    @property
    def support(self):
        return (self.center - 2.0 * self.halfwidth, self.center + 2.0 * self.halfwidth)

    def __call__(self, x):
        t = np.abs((np.asarray(x, dtype=float) - self.center) / self.halfwidth)
        out = np.where(
            t <= 1.0,
            1.0 - 1.5 * t**2 + 0.75 * t**3,
            np.where(t <= 2.0, 0.25 * np.maximum(2.0 - t, 0.0) ** 3, 0.0),
        )
        out = self.amplitude * out
        return float(out) if out.ndim == 0 else out

    def describe(self):
        return {
            "kind": "cubic_bump",
            "center": self.center,
            "halfwidth": self.halfwidth,
            "amplitude": self.amplitude,
        }


class PlateauBump:
    """Flat top of height 1 with cubic smoothstep ramps to zero.

    Exactly 1 on [center - flat, center + flat]; support extends by `ramp`
    on each side.
    """

    def __init__(self, center=0.0, flat=1.0, ramp=1.0):
        if flat < 0 or ramp <= 0:
            raise ValueError("need flat >= 0 and ramp > 0")
        self.center = float(center)
        self.flat = float(flat)
        self.ramp = float(ramp)

    @property
    def support(self):
        r = self.flat + self.ramp
        return (self.center - r, self.center + r)

    def __call__(self, x):
        t = (np.abs(np.asarray(x, dtype=float) - self.center) - self.flat) / self.ramp
        t = np.clip(t, 0.0, 1.0)
        out = 1.0 - t * t * (3.0 - 2.0 * t)
        return float(out) if out.ndim == 0 else out

    def describe(self):
        return {
            "kind": "plateau_bump",
            "center": self.center,
            "flat": self.flat,
            "ramp": self.ramp,
        }


class TruncatedGaussian:
    """exp(-(x-c)^2 / 2 sigma^2) cut off at |x - c| = 8 sigma."""

    CUTOFF = 8.0

    def __init__(self, center=0.0, sigma=1.0, amplitude=1.0):
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        self.center = float(center)
        self.sigma = float(sigma)
        self.amplitude = float(amplitude)

    @property
    def support(self):
        r = self.CUTOFF * self.sigma
        return (self.center - r, self.center + r)

    def __call__(self, x):
        u = (np.asarray(x, dtype=float) - self.center) / self.sigma
        out = self.amplitude * np.exp(-0.5 * u * u) * (np.abs(u) <= self.CUTOFF)
        return float(out) if out.ndim == 0 else out

    def describe(self):
        return {
            "kind": "truncated_gaussian",
            "center": self.center,
            "sigma": self.sigma,
            "amplitude": self.amplitude,
        }


def from_descriptor(desc):
    kind = desc.get("kind")
    if kind == "cubic_bump":
        return CubicBump(
            desc.get("center", 0.0),
            desc.get("halfwidth", 1.0),
            desc.get("amplitude", 1.0),
        )
    if kind == "plateau_bump":
        return PlateauBump(
            desc.get("center", 0.0),
            desc.get("flat", 1.0),
            desc.get("ramp", 1.0),
        )
    if kind == "truncated_gaussian":
        return TruncatedGaussian(
            desc.get("center", 0.0),
            desc.get("sigma", 1.0),
            desc.get("amplitude", 1.0),
        )
    raise ValueError("unknown test-function kind: %r" % (kind,))
