"""Spectral-domain quadrature with product integration for the log kernel.

The domain [-lambda_max, lambda_max] is covered by composite Gauss-Legendre
panels.  Integrals of log|x - y| * g(y) are done by product integration:
g is interpolated by the panel's nodal polynomial and the moments of
log|x - y| against monomials are evaluated in closed form, so the kernel
singularity costs no accuracy.  Far from the singularity the plain nodal
rule is already exact to panel order and is used instead (the closed-form
moments suffer cancellation for distant targets, the nodal rule does not).
"""

import numpy as np

__all__ = [
    "QuadratureGrid",
    "PanelInterpolant",
    "gauss_panels",
    "log_product_weights",
    "refine_edges_at",
]

# Targets with |s| <= _MOMENT_RANGE (panel coordinates) use exact moments;
# beyond it the integrand is analytic in a comfortable Bernstein ellipse.
_MOMENT_RANGE = 2.5


def gauss_panels(edges, p):
    """Composite Gauss-Legendre nodes and weights on consecutive panels.

    edges: (n+1,) increasing; returns nodes, weights of shape (n*p,).
    """
    edges = np.asarray(edges, dtype=float)
    t, w = np.polynomial.legendre.leggauss(p)
    lo = edges[:-1][:, None]
    hi = edges[1:][:, None]
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo) + half * t[None, :]).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def _lagrange_from_moments(p):
    """Matrix C with (C @ m) = nodal weights, m the monomial moments."""
    t, _ = np.polynomial.legendre.leggauss(p)
    powers = t[:, None] ** np.arange(p)[None, :]
    return np.linalg.inv(powers).T


def _log_moments(s, p):
    """m_k(s) = int_{-1}^{1} t^k log|s - t| dt for k < p, vectorized in s."""
    s = np.asarray(s, dtype=float)
    # the k-th moment is finite even when s sits on an endpoint; clamping
    # keeps the 0 * log(0) limit finite without branching
    lm = np.log(np.maximum(np.abs(s - 1.0), 1e-30))
    lp = np.log(np.maximum(np.abs(s + 1.0), 1e-30))
    ratio = lp - lm
    powers = np.empty(s.shape + (p + 1,))
    powers[..., 0] = 1.0
    for n in range(1, p + 1):
        powers[..., n] = powers[..., n - 1] * s
    out = np.empty(s.shape + (p,))
    for k in range(p):
        sign = -1.0 if (k + 1) % 2 else 1.0
        acc = lm - sign * lp
        for j in range(0, k + 1, 2):
            acc -= 2.0 * powers[..., k - j] / (j + 1)
        acc += powers[..., k + 1] * ratio
        out[..., k] = acc / (k + 1)
    return out


def log_product_weights(targets, edges, p, lagrange=None):
    """Weights W with (W @ g(nodes)) ~= int log|x_i - y| g(y) dy.

    targets: (M,) evaluation points; edges: (n+1,) panel edges; p nodes
    per panel.  Returns W of shape (M, n*p); nodes come from
    gauss_panels(edges, p).
    """
    targets = np.asarray(targets, dtype=float)
    edges = np.asarray(edges, dtype=float)
    n = len(edges) - 1
    t, w = np.polynomial.legendre.leggauss(p)
    if lagrange is None:
        lagrange = _lagrange_from_moments(p)
    W = np.empty((len(targets), n * p))
    for j in range(n):
        lo, hi = edges[j], edges[j + 1]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        s = (targets - mid) / half
        near = np.abs(s) <= _MOMENT_RANGE
        block = np.empty((len(targets), p))
        if np.any(near):
            m = _log_moments(s[near], p)
            # log|x-y| = log(half) + log|s-t|; int l_k(t) dt = gauss weight
            block[near] = half * (m @ lagrange.T + np.log(half) * w[None, :])
        if not np.all(near):
            far = ~near
            ynodes = mid + half * t
            block[far] = (half * w)[None, :] * np.log(
                np.abs(targets[far, None] - ynodes[None, :])
            )
        W[:, j * p : (j + 1) * p] = block
    return W


def refine_edges_at(edges, center, levels=30, pad=1):
    """Panel edges with geometric grading inserted around an interior point.

    The panel containing `center` (plus `pad` neighbors on each side) is
    replaced by subpanels whose widths halve toward the point, so that
    integrands with a log singularity there are panelwise analytic.
    """
    edges = np.asarray(edges, dtype=float)
    if not edges[0] < center < edges[-1]:
        raise ValueError("refinement center outside the panel range")
    j = int(np.searchsorted(edges, center) - 1)
    j0 = max(j - pad, 0)
    j1 = min(j + pad + 1, len(edges) - 1)
    lo, hi = edges[j0], edges[j1]
    scales = np.power(0.5, np.arange(levels, -1.0, -1.0))
    left = center - (center - lo) * scales if center > lo else np.empty(0)
    right = center + (hi - center) * scales if hi > center else np.empty(0)
    inner = np.concatenate(([lo], left, [center], right[::-1], [hi]))
    inner = np.unique(inner)
    return np.concatenate((edges[: j0 + 1], inner[1:-1], edges[j1:]))


class PanelInterpolant:
    """Panelwise barycentric Lagrange interpolation of nodal data.

    Spectrally accurate for data smooth on each panel; this is the off-node
    evaluator for dressed profiles and defect-corrected solutions.
    """

    def __init__(self, edges, nodes_per_panel, values):
        edges = np.asarray(edges, dtype=float)
        p = int(nodes_per_panel)
        values = np.asarray(values, dtype=float)
        if values.shape != ((len(edges) - 1) * p,):
            raise ValueError("nodal data does not match the panel layout")
        self.edges = edges
        self.p = p
        self.values = values.reshape(len(edges) - 1, p)
        t, _ = np.polynomial.legendre.leggauss(p)
        self._t = t
        diff = t[:, None] - t[None, :]
        np.fill_diagonal(diff, 1.0)
        self._bary = 1.0 / np.prod(diff, axis=1)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xf = np.atleast_1d(x).astype(float)
        idx = np.clip(np.searchsorted(self.edges, xf) - 1, 0, len(self.edges) - 2)
        a = self.edges[idx]
        b = self.edges[idx + 1]
        s = (2.0 * xf - (a + b)) / (b - a)
        d = s[:, None] - self._t[None, :]
        exact = np.abs(d) < 1e-14
        d = np.where(exact, 1.0, d)
        w = self._bary[None, :] / d
        out = np.einsum("ij,ij->i", w, self.values[idx]) / np.sum(w, axis=1)
        hit_rows = exact.any(axis=1)
        if np.any(hit_rows):
            rows = np.nonzero(hit_rows)[0]
            cols = np.argmax(exact[rows], axis=1)
            out[rows] = self.values[idx[rows], cols]
        return out[0] if scalar else out


class QuadratureGrid:
    """Gauss-Legendre panel grid with a product-integration log kernel.

    nodes/weights: the plain quadrature rule.
    log_kernel: matrix L with (L @ g)[i] ~= int log|x_i - y| g(y) dy.
    """

    def __init__(self, lambda_max, n_panels=125, nodes_per_panel=16):
        if lambda_max <= 0:
            raise ValueError("lambda_max must be positive")
        if n_panels < 2 or nodes_per_panel < 4:
            raise ValueError("grid too coarse to mean anything")
        self.lambda_max = float(lambda_max)
        self.n_panels = int(n_panels)
        self.nodes_per_panel = int(nodes_per_panel)
        self.panel_edges = np.linspace(-lambda_max, lambda_max, n_panels + 1)
        self.nodes, self.weights = gauss_panels(self.panel_edges, nodes_per_panel)
        self._lagrange = _lagrange_from_moments(nodes_per_panel)
        self.log_kernel = log_product_weights(
            self.nodes, self.panel_edges, nodes_per_panel, self._lagrange
        )
        self._factor_cache = {}

    @property
    def size(self):
        return len(self.nodes)

    def integrate(self, values):
        """Plain quadrature of nodal values."""
        return float(np.dot(self.weights, values))

    def apply_T(self, values):
        """T g = 2 * int log|x - y| g(y) dy at the nodes."""
        return 2.0 * (self.log_kernel @ values)

    def weights_at(self, targets, edges=None):
        """Product-integration log weights for arbitrary targets/panels."""
        if edges is None:
            edges = self.panel_edges
        return log_product_weights(
            targets, edges, self.nodes_per_panel, self._lagrange
        )

    def interpolant(self, values):
        return PanelInterpolant(self.panel_edges, self.nodes_per_panel, values)

    def integrate_between(self, values, a, b):
        """Integral of the panelwise interpolant of `values` over [a, b]."""
        if b <= a:
            return 0.0
        a = max(a, self.panel_edges[0])
        b = min(b, self.panel_edges[-1])
        if b <= a:
            return 0.0
        f = self.interpolant(values)
        cuts = self.panel_edges[(self.panel_edges > a) & (self.panel_edges < b)]
        pieces = np.concatenate(([a], cuts, [b]))
        y, w = gauss_panels(pieces, self.nodes_per_panel)
        return float(np.dot(w, f(y)))
