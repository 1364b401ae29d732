"""Spectral layer: eigensolver, localization assignment, scattering relation."""

import itertools

import numpy as np
import pytest

from toda_hydro.lattice import LatticeConfig, TodaState, evolve, sample_equilibrium
from toda_hydro.spectral import (
    Spectrum,
    eigendecompose,
    localization_bijection,
    quasiparticles,
    scattering_residual,
)


def sturm_count(a, b, x):
    """Number of eigenvalues strictly below x, by the Sturm sequence."""
    cnt = 0
    d = b[0] - x
    if d < 0:
        cnt += 1
    for i in range(1, len(b)):
        denom = d if d != 0.0 else 1e-300
        d = b[i] - x - a[i - 1] ** 2 / denom
        if d < 0:
            cnt += 1
    return cnt


def sturm_eigenvalues(a, b, tol=1e-13):
    """Hand-rolled bisection oracle, returned descending."""
    n = len(b)
    rad = np.max(np.abs(b)) + 2.0 * np.max(np.abs(a)) + 1.0
    out = []
    for k in range(1, n + 1):
        lo, hi = -rad, rad
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if sturm_count(a, b, mid) >= k:
                hi = mid
            else:
                lo = mid
        out.append(0.5 * (lo + hi))
    return np.array(out)[::-1]


def test_two_site_closed_form():
    cfg = LatticeConfig(beta=1.0, theta=1.0, n_sites=2)
    s = TodaState(cfg, np.array([1.0]), np.zeros(2), np.zeros(2))
    spec = eigendecompose(s)
    assert np.max(np.abs(spec.eigenvalues - [1.0, -1.0])) < 1e-14
    u_expect = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    for col in range(2):
        err = min(
            np.max(np.abs(spec.eigenvectors[:, col] - sgn * u_expect[:, col]))
            for sgn in (1.0, -1.0)
        )
        assert err < 1e-14


def test_eigensolver_vs_sturm_oracle():
    cfg = LatticeConfig(beta=2.0, theta=0.7, n_sites=8)
    s = sample_equilibrium(cfg, seed=42)
    oracle = sturm_eigenvalues(s.a, s.b)
    spec = eigendecompose(s)
    assert np.max(np.abs(spec.eigenvalues - oracle)) < 1e-10
    spec.validate(s.a, s.b)
    # both eigenvalues-only drivers agree with the vectors path
    for method in ("ql", "bisect"):
        vals = eigendecompose(s, vectors=False, method=method).eigenvalues
        assert np.max(np.abs(vals - spec.eigenvalues)) < 1e-12
    with pytest.raises(ValueError):
        eigendecompose(s, vectors=False, method="qr")


def test_trace_identities():
    s = sample_equilibrium(LatticeConfig(beta=2.0, theta=0.7, n_sites=64), seed=6)
    spec = eigendecompose(s)
    assert abs(spec.eigenvalues.sum() - s.b.sum()) < 1e-10
    assert abs((spec.eigenvalues**2).sum()
               - (s.b**2).sum() - 2.0 * (s.a**2).sum()) < 1e-9


def test_localization_on_diagonal_matrix():
    # an exactly diagonal "Lax matrix": eigenvector j is the unit vector at
    # the site holding the j-th largest diagonal entry
    bvals = np.array([0.3, -1.2, 2.5, 0.9, -0.4, 1.7])
    order = np.argsort(bvals)[::-1]
    u = np.zeros((6, 6))
    for j, site in enumerate(order):
        u[site, j] = 1.0
    spec = Spectrum(bvals[order], u)
    sigma = localization_bijection(spec)
    assert np.array_equal(sigma, order)


def test_assignment_matches_brute_force():
    """Total localized weight equals the best over all 8! site permutations."""
    cfg = LatticeConfig(beta=2.0, theta=0.7, n_sites=8)
    for seed in range(12):
        s = sample_equilibrium(cfg, seed=100 + seed)
        spec = eigendecompose(s)
        w = (spec.eigenvectors**2).T
        sigma = localization_bijection(spec)
        ours = w[np.arange(8), sigma].sum()
        best = max(sum(w[j, p[j]] for j in range(8))
                   for p in itertools.permutations(range(8)))
        assert abs(best - ours) < 1e-12


@pytest.mark.parametrize("n", [64, 256, 1024])
def test_bijection_and_weight_floor(n):
    cfg = LatticeConfig(beta=1.0, theta=0.25, n_sites=n)
    s = sample_equilibrium(cfg, seed=n)
    frame = quasiparticles(s, eigendecompose(s))
    assert np.unique(frame.phi).size == n
    assert frame.zeta_achieved >= 1.0 / (2 * n)
    assert np.array_equal(np.sort(frame.Lambda),
                          np.sort(eigendecompose(s).eigenvalues))


def test_decoupled_limit_positions():
    # widely separated particles: Q_j is the position of the site holding
    # the j-th largest momentum
    cfg = LatticeConfig(beta=1.0, theta=0.5, n_sites=16)
    q = np.cumsum(np.full(16, 40.0))
    q -= q[cfg.site_index(0)]
    a = np.exp(-0.5 * np.diff(q))
    b = np.random.default_rng(5).normal(size=16)
    s = TodaState(cfg, a, b, q)
    frame = quasiparticles(s, eigendecompose(s))
    expect = q[np.argsort(b)[::-1]]
    assert np.max(np.abs(frame.Q - expect)) < 1e-8


def test_eigenvalue_site_correlation():
    """At theta = 0.25 the matrix is strongly localized, so the eigenvalue
    assigned to a site tracks the local diagonal entry."""
    cfg = LatticeConfig(beta=1.0, theta=0.25, n_sites=4000)
    s = sample_equilibrium(cfg, seed=77)
    frame = quasiparticles(s, eigendecompose(s))
    corr = np.corrcoef(frame.Lambda[1000:3000], s.b[1000:3000])[0, 1]
    assert corr > 0.5, corr


def test_scattering_residual_zero_time():
    cfg = LatticeConfig(beta=1.0, theta=0.25, n_sites=256)
    s = sample_equilibrium(cfg, seed=13)
    spec = eigendecompose(s)
    frame = quasiparticles(s, spec)
    res = scattering_residual(frame, frame, spec, 0.0)
    assert np.max(np.abs(res)) < 1e-12


def test_scattering_two_particle_phase_shift():
    """N=2 collision: the residual absorbs the exact 2 log|lam1 - lam2|."""
    cfg = LatticeConfig(beta=1.0, theta=1.0, n_sites=2, dt=0.001)
    q0 = np.array([-30.0, 30.0])
    a0 = np.exp(-0.5 * (q0[1] - q0[0])) * np.ones(1)
    s0 = TodaState(cfg, a0, np.array([0.8, -0.6]), q0)
    spec0 = eigendecompose(s0)
    f0 = quasiparticles(s0, spec0)
    sT = evolve(s0, 160.0)
    fT = quasiparticles(sT, eigendecompose(sT))
    res = scattering_residual(f0, fT, spec0, 160.0)
    assert np.max(np.abs(res)) < 1e-3


def test_label_positions_stay_coherent():
    # after t=10 the bulk localization centers move by O(t), far less than
    # the diffusive-envelope bound used here
    cfg = LatticeConfig(beta=1.0, theta=0.25, n_sites=1024, dt=0.005)
    s0 = sample_equilibrium(cfg, seed=21)
    f0 = quasiparticles(s0, eigendecompose(s0))
    sT = evolve(s0, 10.0)
    fT = quasiparticles(sT, eigendecompose(sT))
    move = np.abs(fT.phi - f0.phi)
    bulk = np.abs(f0.phi) < 256
    assert np.mean(move[bulk] <= 10 * 30 * np.log(1024)) >= 0.99
