"""Microscopic layer: equilibrium sampling, integrators, charges, currents."""

from contextlib import contextmanager

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.stats import gamma as gamma_dist
from scipy.stats import kstest, norm

import toda_hydro.lattice.evolution as evolution
from toda_hydro.kernels import digamma, trigamma
from toda_hydro.lattice import (
    BlowUpError,
    LatticeConfig,
    TodaState,
    _fallback,
    backend_name,
    charge_field,
    current_field,
    evolve,
    integrated_current,
    local_charge,
    local_current,
    sample_equilibrium,
)


@contextmanager
def fallback_backend():
    saved = evolution._kernels
    evolution._kernels = _fallback
    try:
        yield
    finally:
        evolution._kernels = saved


def dense_lax(state):
    return np.diag(state.b) + np.diag(state.a, 1) + np.diag(state.a, -1)


# ---------------------------------------------------------------------------
# sampling


def test_equilibrium_moments():
    """Sample moments of r and p against the Gamma/Gaussian marginals."""
    cfg = LatticeConfig(beta=1.0, theta=0.5, n_sites=100000)
    st = sample_equilibrium(cfg, seed=2024)
    r = st.r()
    alpha = np.log(1.0) - digamma(0.5)
    var_r = trigamma(0.5)
    se_mean = np.sqrt(var_r / r.size)
    assert abs(r.mean() - alpha) <= 4.0 * se_mean
    assert abs(r.var() - var_r) <= 6.0 * var_r * np.sqrt(2.0 / r.size)

    cfg2 = LatticeConfig(beta=4.0, theta=0.5, n_sites=100000)
    st2 = sample_equilibrium(cfg2, seed=7)
    assert abs(st2.b.mean()) <= 4.0 * 0.5 / np.sqrt(1e5)
    assert abs(st2.b.var() - 0.25) <= 6.0 * 0.25 * np.sqrt(2.0 / 1e5)


def test_sampling_deterministic_and_anchored():
    cfg = LatticeConfig(beta=1.0, theta=0.5, n_sites=4096)
    s1 = sample_equilibrium(cfg, seed=99)
    s2 = sample_equilibrium(cfg, seed=99)
    assert np.array_equal(s1.a, s2.a)
    assert np.array_equal(s1.b, s2.b)
    assert np.array_equal(s1.q, s2.q)
    # site 0 is the anchor of the position ladder
    assert s1.q[cfg.site_index(0)] == 0.0
    s1.validate()
    s3 = sample_equilibrium(cfg, seed=100)
    assert not np.array_equal(s1.b, s3.b)


def test_config_rejects_bad_parameters():
    with pytest.raises(ValueError):
        LatticeConfig(beta=0.0, theta=0.5, n_sites=16)
    with pytest.raises(ValueError):
        LatticeConfig(beta=1.0, theta=-0.1, n_sites=16)
    with pytest.raises(ValueError):
        LatticeConfig(beta=1.0, theta=0.5, n_sites=1)
    with pytest.raises(ValueError):
        LatticeConfig(beta=1.0, theta=0.5, n_sites=16, integrator="euler")


def test_thermal_invariance_ks():
    """The product measure is exactly invariant: KS at t=10 on 1e4 samples.

    One bulk reading per sample keeps the draws independent.  99.9%
    Kolmogorov critical value: 1.9495 / sqrt(n).
    """
    n_samples = 10000
    cfg = LatticeConfig(beta=1.0, theta=0.5, n_sites=48, dt=0.005)
    mid = 24
    bs = np.empty(n_samples)
    a2 = np.empty(n_samples)
    for i in range(n_samples):
        st = evolve(sample_equilibrium(cfg, seed=5000 + i), 10.0)
        bs[i] = st.b[mid]
        a2[i] = st.a[mid] ** 2
    crit = 1.9495 / np.sqrt(n_samples)
    stat_b = kstest(bs, norm(loc=0.0, scale=1.0).cdf).statistic
    stat_a = kstest(a2, gamma_dist(a=0.5, scale=1.0).cdf).statistic
    assert stat_b < crit, stat_b
    assert stat_a < crit, stat_a


# ---------------------------------------------------------------------------
# integrators


def test_zero_time_evolve_is_identity():
    cfg = LatticeConfig(beta=1.0, theta=1.0, n_sites=64)
    s0 = sample_equilibrium(cfg, seed=1)
    s1 = evolve(s0, 0.0)
    assert np.array_equal(s1.q, s0.q)
    assert np.array_equal(s1.b, s0.b)


def test_evolve_matches_ode_oracle():
    """Both integrators against a tight-tolerance generic ODE solve, N=8."""
    cfg = LatticeConfig(beta=1.0, theta=1.0, n_sites=8, dt=0.002)
    s0 = sample_equilibrium(cfg, seed=3)

    def rhs(_t, y):
        q, p = y[:8], y[8:]
        e = np.exp(q[:-1] - q[1:])
        f = np.zeros(8)
        f[:-1] -= e
        f[1:] += e
        return np.concatenate([p, f])

    sol = solve_ivp(rhs, (0.0, 5.0), np.concatenate([s0.q, s0.b]),
                    rtol=1e-12, atol=1e-12, t_eval=[5.0])
    ours = evolve(s0, 5.0)
    assert np.max(np.abs(ours.q - sol.y[:8, -1])) < 1e-6
    assert np.max(np.abs(ours.b - sol.y[8:, -1])) < 1e-6

    cfg_v = LatticeConfig(beta=1.0, theta=1.0, n_sites=8, dt=0.0005,
                          integrator="verlet2")
    s_v = TodaState(cfg_v, s0.a.copy(), s0.b.copy(), s0.q.copy())
    ours_v = evolve(s_v, 5.0)
    assert np.max(np.abs(ours_v.q - sol.y[:8, -1])) < 1e-5


def test_two_particle_exchange():
    """Asymptotics of a two-particle collision: exchanged momenta and the
    2 log|lam1 - lam2| position shift, split between fast and slow carrier."""
    lam1, lam2 = 0.8, -0.6
    cfg = LatticeConfig(beta=1.0, theta=1.0, n_sites=2, dt=0.001)
    q0 = np.array([-30.0, 30.0])
    p0 = np.array([lam1, lam2])
    a0 = np.exp(-0.5 * (q0[1] - q0[0])) * np.ones(1)
    s = TodaState(cfg, a0, p0, q0)
    s1 = evolve(s, 80.0)
    s2 = evolve(s1, 100.0)
    v1 = (s2.q[0] - s1.q[0]) / 20.0
    v2 = (s2.q[1] - s1.q[1]) / 20.0
    assert abs(v1 - lam2) < 1e-6   # positions keep their order, momenta swap
    assert abs(v2 - lam1) < 1e-6
    c1 = s2.q[0] - v1 * 100.0
    c2 = s2.q[1] - v2 * 100.0
    shift = 2.0 * np.log(abs(lam1 - lam2))
    assert abs((c2 - q0[0]) + shift) < 1e-3
    assert abs((c1 - q0[1]) - shift) < 1e-3


def test_trace_drift_small():
    # boosted state so the odd traces have an O(N) scale
    cfg = LatticeConfig(beta=1.0, theta=0.5, n_sites=256, dt=0.005)
    s0 = sample_equilibrium(cfg, seed=5)
    s0 = TodaState(cfg, s0.a, s0.b + 1.0, s0.q)
    sT = evolve(s0, 20.0)
    for m in range(1, 5):
        tr0 = charge_field(s0, m).values.sum()
        trT = charge_field(sT, m).values.sum()
        assert abs((trT - tr0) / tr0) < 1e-7, m


def test_spectrum_conserved():
    cfg = LatticeConfig(beta=1.0, theta=0.5, n_sites=128, dt=0.005)
    s0 = sample_equilibrium(cfg, seed=9)
    sT = evolve(s0, 10.0)
    lam0 = np.linalg.eigvalsh(dense_lax(s0))
    lamT = np.linalg.eigvalsh(dense_lax(sT))
    assert np.max(np.abs(lamT - lam0)) < 1e-7


def test_blow_up_raised_on_both_backends():
    cfg = LatticeConfig(beta=1.0, theta=1.0, n_sites=4, dt=0.01)
    q = np.array([0.0, -710.0, -710.5, -711.0])
    a = np.exp(-0.5 * np.diff(q))
    for use_fallback in (False, True):
        s = TodaState(cfg, a.copy(), np.zeros(4), q.copy())
        if use_fallback:
            with fallback_backend():
                with pytest.raises(BlowUpError):
                    evolve(s, 1.0)
        else:
            with pytest.raises(BlowUpError):
                evolve(s, 1.0)


def test_backends_agree():
    cfg = LatticeConfig(beta=1.0, theta=0.5, n_sites=128, dt=0.005)
    s0 = sample_equilibrium(cfg, seed=100)
    out_active = evolve(s0, 2.0)
    with fallback_backend():
        out_fb = evolve(s0, 2.0)
    assert np.max(np.abs(out_active.q - out_fb.q)) < 1e-9
    assert np.max(np.abs(out_active.b - out_fb.b)) < 1e-9
    # and the active backend is bitwise reproducible
    again = evolve(s0, 2.0)
    assert np.array_equal(out_active.q, again.q)
    assert np.array_equal(out_active.b, again.b)
    assert backend_name() in ("compiled", "fallback")


# ---------------------------------------------------------------------------
# charges and currents


def test_charge_dense_oracle():
    """Banded recursion vs dense matrix powers at N=8, orders 0..5."""
    s = sample_equilibrium(LatticeConfig(beta=2.0, theta=0.7, n_sites=8), seed=21)
    L = dense_lax(s)
    for m in range(6):
        Lm = np.linalg.matrix_power(L, m)
        for i in range(8):
            site = s.config.n1 + i
            assert abs(local_charge(s, m, site) - Lm[i, i]) < 1e-10
        cf = charge_field(s, m).values
        assert np.max(np.abs(cf - np.diag(Lm))) < 1e-10
    # closed forms in the bulk
    i = 3
    site = s.config.n1 + i
    assert local_charge(s, 0, site) == 1.0
    assert abs(local_charge(s, 1, site) - s.b[i]) < 1e-14
    expect = s.b[i] ** 2 + s.a[i] ** 2 + s.a[i - 1] ** 2
    assert abs(local_charge(s, 2, site) - expect) < 1e-12
    # the modified zeroth charge is the local stretch
    assert local_charge(s, 0, site, modified=True) == s.q[i + 1] - s.q[i]


def test_current_dense_oracle():
    s = sample_equilibrium(LatticeConfig(beta=2.0, theta=0.7, n_sites=8), seed=21)
    L = dense_lax(s)
    for m in range(5):
        Lm = np.linalg.matrix_power(L, m)
        for i in range(1, 8):
            site = s.config.n1 + i
            assert abs(local_current(s, m, site) - s.a[i - 1] * Lm[i, i - 1]) < 1e-10
    site = s.config.n1 + 7
    assert abs(local_current(s, 1, site) - s.a[6] ** 2) < 1e-14
    assert local_current(s, 0, site) == 0.0
    vals = current_field(s, 2)
    Lm2 = np.linalg.matrix_power(L, 2)
    assert np.max(np.abs(vals[1:] - s.a * np.diag(Lm2, -1))) < 1e-12


def test_charge_current_conservation_fd():
    """d/dt k_m(i) = j_m(i) - j_m(i+1), central difference, orders 1..3."""
    h = 1e-4
    cfg = LatticeConfig(beta=1.0, theta=1.0, n_sites=64, dt=h)
    s0 = sample_equilibrium(cfg, seed=33)
    s_mid = evolve(s0, h)
    s_end = evolve(s_mid, 2.0 * h)
    rng = np.random.default_rng(0)
    sites = rng.choice(np.arange(10, 54), size=50, replace=True)
    for m in (1, 2, 3):
        for i in sites:
            site = cfg.n1 + int(i)
            lhs = (local_charge(s_end, m, site) - local_charge(s0, m, site)) / (2.0 * h)
            rhs = local_current(s_mid, m, site) - local_current(s_mid, m, site + 1)
            assert abs(lhs - rhs) < 1e-6


def test_integrated_current_forms():
    cfg = LatticeConfig(beta=1.0, theta=0.5, n_sites=256, dt=0.005)
    s0 = sample_equilibrium(cfg, seed=77)
    assert integrated_current(s0, s0, 2, 0.0, 0.0) == 0.0
    sT = evolve(s0, 10.0)
    # m = 0 reduces to particle counting across the cut
    j0 = integrated_current(s0, sT, 0, 0.3, 0.3)
    count = float(np.sum(s0.q < 0.3) - np.sum(sT.q < 0.3))
    assert j0 == count


def test_integrated_current_vs_time_quadrature():
    """Cross-check against the trapezoid time integral of the local current
    at a bulk anchor, plus the membership correction between anchor and cut.
    Valid whenever every site below the anchor stays below the cut."""
    anchor = -20
    m, cut, t_final = 2, 0.3, 10.0
    cfg = LatticeConfig(beta=1.0, theta=0.5, n_sites=256, dt=0.005)
    s0 = sample_equilibrium(cfg, seed=78)
    acc = {"val": 0.0, "prev": local_current(s0, m, anchor), "t": 0.0}

    def cb(st):
        j = local_current(st, m, anchor)
        acc["val"] += 0.5 * (acc["prev"] + j) * (st.time - acc["t"])
        acc["prev"] = j
        acc["t"] = st.time

    sT = evolve(s0, t_final, callback=cb)
    idx = cfg.site_index(anchor)
    assert s0.q[:idx].max() < cut and sT.q[:idx].max() < cut
    k0 = charge_field(s0, m).values
    kT = charge_field(sT, m).values
    correction = (k0[idx:][s0.q[idx:] < cut].sum()
                  - kT[idx:][sT.q[idx:] < cut].sum())
    direct = integrated_current(s0, sT, m, cut, cut)
    assert abs(direct - (acc["val"] + correction)) < 1e-4 * np.sqrt(t_final)
