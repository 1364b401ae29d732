"""Monte Carlo experiment drivers.

Each experiment splits into a per-sample worker (a module-level function,
so it pickles for process pools) and an orchestrator that schedules the
ensemble, reduces index-ordered results, and attaches the limiting
prediction from the kernel stack.  All randomness flows through
sample_seed(base_seed, index), so outputs are pure functions of the
configuration regardless of worker count.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np
from scipy.interpolate import PchipInterpolator

from ..fluct import current_limit_cov, q0_variance, twopoint_limit
from ..kernels.dressing import sigma2
from ..kernels.tdressed import diffusivity
from ..lattice import (
    LatticeConfig,
    TodaState,
    charge_field,
    evolve,
    integrated_current,
    sample_equilibrium,
)
from ..spectral import eigendecompose, quasiparticles, scattering_residual
from .config import EnsembleStats, WindowError, stats_from_samples, variance_stats
from .seeding import sample_seed

__all__ = [
    "run_conservation",
    "run_current",
    "run_dos",
    "run_linstat",
    "run_q0",
    "run_scattering",
    "run_stretch",
    "run_tracer",
    "run_twopoint",
]


def _ensemble_map(worker, n_samples, workers):
    """Index-ordered map of a one-argument worker over sample indices."""
    if workers <= 1:
        return [worker(i) for i in range(n_samples)]
    chunk = max(1, n_samples // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, range(n_samples), chunksize=chunk))


# ---------------------------------------------------------------------------
# stretch

def _stretch_worker(lattice, base_seed, index):
    state = sample_equilibrium(lattice, sample_seed(base_seed, index))
    r = state.r()
    return float(np.sum(r)), float(np.sum(r * r)), r.size


def run_stretch(cfg, kernels, workers=1):
    """Mean stretch against the digamma prediction."""
    worker = partial(_stretch_worker, cfg.lattice, cfg.base_seed)
    parts = _ensemble_map(worker, cfg.ensemble_size, workers)
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    count = sum(p[2] for p in parts)
    mean = total / count
    var = total_sq / count - mean * mean
    var *= count / (count - 1)
    se = math.sqrt(var / count)
    predicted = kernels.alpha
    return [
        EnsembleStats(
            "stretch_mean_r", mean, var, se, count, predicted,
            (mean - predicted) / se,
        )
    ]


# ---------------------------------------------------------------------------
# density of states

def _dos_worker(lattice, base_seed, n_bins, lam_max, index):
    state = sample_equilibrium(lattice, sample_seed(base_seed, index))
    spec = eigendecompose(state, vectors=False)
    lam = spec.eigenvalues
    counts, _ = np.histogram(lam, bins=n_bins, range=(-lam_max, lam_max))
    return counts, float(np.mean(lam * lam))


def run_dos(cfg, kernels, workers=1, n_bins=100):
    """Pooled eigenvalue histogram against the limiting density."""
    lam_max = kernels.grid.lambda_max
    worker = partial(_dos_worker, cfg.lattice, cfg.base_seed, n_bins, lam_max)
    parts = _ensemble_map(worker, cfg.ensemble_size, workers)
    counts = np.sum([p[0] for p in parts], axis=0)
    mass = counts / counts.sum()
    edges = np.linspace(-lam_max, lam_max, n_bins + 1)
    rho_nodal = kernels.profiles.rho
    predicted_mass = np.array([
        kernels.grid.integrate_between(rho_nodal, edges[b], edges[b + 1])
        for b in range(n_bins)
    ])
    tv = 0.5 * float(np.sum(np.abs(mass - predicted_mass)))
    second = stats_from_samples(
        "dos_second_moment",
        [p[1] for p in parts],
        predicted=(1.0 + 2.0 * kernels.theta) / kernels.beta,
    )
    return {
        "tv_distance": tv,
        "bin_edges": edges,
        "mass": mass,
        "predicted_mass": predicted_mass,
        "second_moment": second,
    }


# ---------------------------------------------------------------------------
# linear statistics

def _linstat_worker(lattice, base_seed, coeffs, index):
    state = sample_equilibrium(lattice, sample_seed(base_seed, index))
    spec = eigendecompose(state, vectors=False)
    return float(np.polyval(coeffs[::-1], spec.eigenvalues).sum())


def run_linstat(cfg, coeffs, kernels, workers=1):
    """N^-1 Var of a polynomial linear statistic vs its limiting variance.

    coeffs are ascending-order polynomial coefficients, degree <= 4.
    """
    coeffs = tuple(float(c) for c in coeffs)
    if len(coeffs) > 5:
        raise ValueError("polynomial degree must be at most 4")
    worker = partial(_linstat_worker, cfg.lattice, cfg.base_seed, coeffs)
    xs = _ensemble_map(worker, cfg.ensemble_size, workers)
    grid = kernels.grid
    phi_nodal = np.polyval(coeffs[::-1], grid.nodes)
    predicted = sigma2(grid, kernels.profiles, kernels.dressed, phi_nodal)
    if len(coeffs) == 1:
        predicted = 0.0
    return [
        variance_stats(
            "linstat_var", xs, scale=cfg.lattice.n_sites, predicted=predicted
        )
    ]


# ---------------------------------------------------------------------------
# two-point function

def _twopoint_scalars(ut, u0, bulk, lags, f_vals):
    """Per-sample reduction pieces of the weighted lag sum.

    Returns (raw, shifted, u0bar, utbar): the f-weighted correlation sum,
    the f-weighted window mean of the lagged field, and the two bulk means.
    Grand-mean centering happens at ensemble reduction, not here.
    """
    lo, hi = bulk
    nb = hi - lo
    u0b = u0[lo:hi]
    raw = 0.0
    shifted = 0.0
    csum = np.concatenate(([0.0], np.cumsum(ut)))
    for j, fj in zip(lags, f_vals):
        seg = ut[lo + j : hi + j]
        raw += fj * float(seg @ u0b)
        shifted += fj * float(csum[hi + j] - csum[lo + j])
    return (
        raw / nb,
        shifted / nb,
        float(np.mean(u0b)),
        float(np.mean(ut[lo:hi])),
    )


def _twopoint_worker(lattice, base_seed, m, n, t_evolve, bulk, lags, f_vals,
                     index):
    state0 = sample_equilibrium(lattice, sample_seed(base_seed, index))
    u0 = charge_field(state0, n, modified=True).values
    if t_evolve > 0:
        state_t = evolve(state0, t_evolve)
    else:
        state_t = state0
    ut = charge_field(state_t, m, modified=True).values
    return _twopoint_scalars(ut, u0, bulk, lags, f_vals)


def _twopoint_lags(cfg, f, kernels):
    """Lag grid, nonzero weights, and the window check for one run."""
    T = cfg.T_scale
    lo_x, hi_x = f.support
    j_max = int(math.ceil(max(abs(lo_x), abs(hi_x)) * T))
    lags = np.arange(-j_max, j_max + 1)
    f_vals = np.asarray(f(lags / T), dtype=float)
    keep = f_vals != 0.0
    lags, f_vals = lags[keep], f_vals[keep]
    v_bound = float(np.max(np.abs(kernels.dressed.v_eff)))
    cfg.check_window(v_bound, kernels.alpha, extra_sites=j_max + 2)
    bulk = cfg.bulk_slice()
    n = cfg.lattice.n_sites
    if bulk.start + lags.min() < 0 or bulk.stop + lags.max() >= n:
        raise WindowError("test-function support exceeds the lattice")
    return bulk, lags, f_vals


def _twopoint_reduce(obs_id, parts, f_vals, predicted):
    """Grand-mean-centered estimator from per-sample scalar quadruples."""
    arr = np.asarray(parts, dtype=float)
    raw, shifted, u0bar, utbar = arr.T
    mu_n = float(np.mean(u0bar))
    mu_m = float(np.mean(utbar))
    f_total = float(np.sum(f_vals))
    obs = raw - mu_m * f_total * u0bar - mu_n * shifted + mu_m * mu_n * f_total
    return stats_from_samples(obs_id, obs, predicted=predicted)


def run_twopoint(cfg, m, n, tau, f, kernels, workers=1):
    """Bulk-averaged weighted two-point sum vs its scaling limit."""
    bulk, lags, f_vals = _twopoint_lags(cfg, f, kernels)
    worker = partial(
        _twopoint_worker, cfg.lattice, cfg.base_seed, m, n, tau * cfg.T_scale,
        (bulk.start, bulk.stop), lags, f_vals,
    )
    parts = _ensemble_map(worker, cfg.ensemble_size, workers)
    predicted = twopoint_limit(m, n, tau, f, kernels)
    return [
        _twopoint_reduce(
            "twopoint_m%d_n%d_tau%g" % (m, n, tau), parts, f_vals, predicted
        )
    ]


def _suite_worker(lattice, base_seed, pairs, t_evolve, bulk, lags, f_vals,
                  current_m, q_cut, qp_cut, index):
    state0 = sample_equilibrium(lattice, sample_seed(base_seed, index))
    state_t = evolve(state0, t_evolve) if t_evolve > 0 else state0
    orders = sorted({m for pair in pairs for m in pair})
    u0 = {n: charge_field(state0, n, modified=True).values for n in orders}
    ut = {m: charge_field(state_t, m, modified=True).values for m in orders}
    out = []
    for m, n in pairs:
        out.append(_twopoint_scalars(ut[m], u0[n], bulk, lags, f_vals))
    out.append(integrated_current(state0, state_t, current_m, q_cut, qp_cut))
    return out


def run_fluctuation_suite(cfg, pairs, tau, f, current_m, q_frac, qp_frac,
                          kernels, workers=1):
    """Two-point pairs and the integrated current from shared trajectories.

    One evolve per sample feeds every (m, n) estimator plus the rescaled
    current, keeping the combined cost of the correlation and current
    reproductions at a single ensemble's worth of dynamics.
    """
    T = cfg.T_scale
    bulk, lags, f_vals = _twopoint_lags(cfg, f, kernels)
    worker = partial(
        _suite_worker, cfg.lattice, cfg.base_seed, tuple(pairs), tau * T,
        (bulk.start, bulk.stop), lags, f_vals, current_m,
        T * q_frac, T * qp_frac,
    )
    rows = _ensemble_map(worker, cfg.ensemble_size, workers)
    stats = []
    for k, (m, n) in enumerate(pairs):
        predicted = twopoint_limit(m, n, tau, f, kernels)
        stats.append(
            _twopoint_reduce(
                "twopoint_m%d_n%d_tau%g" % (m, n, tau),
                [row[k] for row in rows], f_vals, predicted,
            )
        )
    currents = np.asarray([row[-1] for row in rows], dtype=float)
    spec_tuple = (current_m, q_frac, qp_frac, tau)
    stats.append(
        variance_stats(
            "current_var_m%d_tau%g" % (current_m, tau), currents, scale=T,
            predicted=current_limit_cov(spec_tuple, spec_tuple, kernels),
        )
    )
    return stats


# ---------------------------------------------------------------------------
# integrated current

def _current_worker(lattice, base_seed, m, q_cut, qp_cut, t_evolve, index):
    state0 = sample_equilibrium(lattice, sample_seed(base_seed, index))
    if t_evolve > 0:
        state_t = evolve(state0, t_evolve)
    else:
        state_t = state0
    return integrated_current(state0, state_t, m, q_cut, qp_cut)


def run_current(cfg, m, q_frac, qp_frac, tau, kernels, workers=1):
    """Variance of the rescaled integrated current vs the limit covariance."""
    T = cfg.T_scale
    v_bound = float(np.max(np.abs(kernels.dressed.v_eff)))
    cfg.check_window(v_bound, kernels.alpha,
                     extra_sites=T * max(abs(q_frac), abs(qp_frac)) / abs(kernels.alpha))
    worker = partial(
        _current_worker, cfg.lattice, cfg.base_seed, m,
        T * q_frac, T * qp_frac, tau * T,
    )
    xs = np.asarray(_ensemble_map(worker, cfg.ensemble_size, workers))
    spec_tuple = (m, q_frac, qp_frac, tau)
    predicted = current_limit_cov(spec_tuple, spec_tuple, kernels)
    return [
        variance_stats(
            "current_var_m%d_tau%g" % (m, tau), xs, scale=T, predicted=predicted
        )
    ]


# ---------------------------------------------------------------------------
# tagged-particle diffusion

def _q0_worker(lattice, base_seed, t1, t2, n_second, index):
    state0 = sample_equilibrium(lattice, sample_seed(base_seed, index))
    i0 = lattice.site_index(0)
    if t1 > 0:
        s1 = evolve(state0, t1)
    else:
        s1 = state0
    x1 = float(s1.q[i0])
    x2 = math.nan
    if index < n_second and t2 > t1:
        s2 = evolve(s1, t2)
        x2 = float(s2.q[i0])
    return x1, x2


def run_q0(cfg, tau, kernels, workers=1, increment_subset=1000):
    """Variance of the tagged site-0 position vs the Brownian limit."""
    T = cfg.T_scale
    v_bound = float(np.max(np.abs(kernels.dressed.v_eff)))
    n_second = min(increment_subset, cfg.ensemble_size)
    # the increment subset evolves on to 2 tau T, doubling the horizon
    cfg.check_window(2.0 * v_bound if n_second > 1 else v_bound, kernels.alpha)
    worker = partial(_q0_worker, cfg.lattice, cfg.base_seed, tau * T,
                     2.0 * tau * T, n_second)
    parts = np.asarray(_ensemble_map(worker, cfg.ensemble_size, workers))
    x1 = parts[:, 0]
    predicted = q0_variance(tau, kernels)
    out = [variance_stats("q0_var_tau%g" % tau, x1, scale=T, predicted=predicted)]
    if tau > 0 and n_second > 1:
        x2 = parts[:n_second, 1]
        a = x1[:n_second]
        b = x2 - a
        a_c = a - np.mean(a)
        b_c = b - np.mean(b)
        var_a = float(np.sum(a_c * a_c) / (len(a) - 1))
        y = a_c * b_c / var_a
        out.append(stats_from_samples("q0_increment_corr", y, predicted=0.0))
    sd = math.sqrt(max(np.var(x1), 1e-300))
    z4 = ((x1 - np.mean(x1)) / sd) ** 4 - 3.0
    out.append(stats_from_samples("q0_excess_kurtosis", z4, predicted=0.0))
    return out


# ---------------------------------------------------------------------------
# tracer diffusivity

def _tracer_worker(lattice, base_seed, t_evolve, center, halfwidth,
                   bulk_sites, v_table, index):
    state0 = sample_equilibrium(lattice, sample_seed(base_seed, index))
    spec0 = eigendecompose(state0)
    frame0 = quasiparticles(state0, spec0)
    state_t = evolve(state0, t_evolve) if t_evolve > 0 else state0
    spec_t = eigendecompose(state_t)
    frame_t = quasiparticles(state_t, spec_t)
    lam = spec0.eigenvalues
    v_interp = PchipInterpolator(v_table[0], v_table[1], extrapolate=False)
    sel = (
        (np.abs(lam - center) <= halfwidth)
        & (np.abs(frame0.phi) <= bulk_sites)
        & (np.abs(frame_t.phi) <= bulk_sites)
    )
    if not np.any(sel):
        return np.empty(0)
    v = v_interp(lam[sel])
    return frame_t.Q[sel] - frame0.Q[sel] - t_evolve * v


def run_tracer(cfg, center, halfwidth, tau, kernels, workers=1):
    """Binned quasi-particle dispersion rate vs the diffusivity kernel."""
    T = cfg.T_scale
    t_evolve = tau * T
    v_bound = float(np.max(np.abs(kernels.dressed.v_eff)))
    cfg.check_window(v_bound, kernels.alpha)
    v_table = (kernels.grid.nodes.copy(), kernels.dressed.v_eff.copy())
    bulk_sites = int(cfg.lattice.n_sites * cfg.bulk_fraction / 2)
    worker = partial(
        _tracer_worker, cfg.lattice, cfg.base_seed, t_evolve, center,
        halfwidth, bulk_sites, v_table,
    )
    parts = _ensemble_map(worker, cfg.ensemble_size, workers)
    nonempty = [d for d in parts if d.size]
    if not nonempty:
        raise ValueError(
            "no quasi-particle fell in the bin (%.3g, %.3g); widen it"
            % (center, halfwidth)
        )
    pooled = np.concatenate(nonempty)
    grand = float(np.mean(pooled))
    if t_evolve > 0:
        per_sample = np.array(
            [np.mean((d - grand) ** 2) / t_evolve for d in nonempty]
        )
    else:
        per_sample = np.array([np.mean(d * d) for d in nonempty])
    predicted = diffusivity(
        kernels.grid, kernels.profiles, kernels.dressed, center
    )
    stats = stats_from_samples("tracer_var_rate", per_sample, predicted=predicted)
    return [stats], pooled


# ---------------------------------------------------------------------------
# scattering summary

def _scattering_worker(lattice, base_seed, t_evolve, bulk_sites, index):
    state0 = sample_equilibrium(lattice, sample_seed(base_seed, index))
    spec0 = eigendecompose(state0)
    frame0 = quasiparticles(state0, spec0)
    state_t = evolve(state0, t_evolve) if t_evolve > 0 else state0
    spec_t = eigendecompose(state_t)
    frame_t = quasiparticles(state_t, spec_t)
    res = scattering_residual(frame0, frame_t, spec0, t_evolve)
    sel = (np.abs(frame0.phi) <= bulk_sites) & (np.abs(frame_t.phi) <= bulk_sites)
    return np.abs(res[sel])


def run_scattering(cfg, tau, workers=1):
    """Median and tail of the scattering residual over the ensemble."""
    t_evolve = tau * cfg.T_scale
    bulk_sites = int(cfg.lattice.n_sites * cfg.bulk_fraction / 2)
    worker = partial(
        _scattering_worker, cfg.lattice, cfg.base_seed, t_evolve, bulk_sites
    )
    parts = _ensemble_map(worker, cfg.ensemble_size, workers)
    pooled = np.concatenate(parts)
    scale = math.sqrt(t_evolve) if t_evolve > 0 else 1.0
    return {
        "median_over_sqrt_t": float(np.median(pooled)) / scale,
        "p95_over_sqrt_t": float(np.percentile(pooled, 95.0)) / scale,
        "count": int(pooled.size),
    }


# ---------------------------------------------------------------------------
# conservation diagnostics

def run_conservation(cfg, t_final=100.0, spectrum_sites=256):
    """Trace and spectrum drift of one boosted trajectory.

    The boost gives every trace an O(N) scale so relative drift is well
    posed (odd traces average to zero in equilibrium).
    """
    lattice = cfg.lattice
    state0 = sample_equilibrium(lattice, sample_seed(cfg.base_seed, 0))
    state0 = TodaState(lattice, state0.a, state0.b + 1.0, state0.q)
    state_t = evolve(state0, t_final)
    rows = []
    for m in range(1, 5):
        tr0 = float(charge_field(state0, m).values.sum())
        tr_t = float(charge_field(state_t, m).values.sum())
        rows.append(("trace_drift_m%d" % m, abs((tr_t - tr0) / tr0)))
    spec_cfg = LatticeConfig(
        beta=lattice.beta, theta=lattice.theta, n_sites=spectrum_sites,
        dt=lattice.dt, integrator=lattice.integrator,
    )
    s0 = sample_equilibrium(spec_cfg, sample_seed(cfg.base_seed, 1))
    s_t = evolve(s0, 50.0)
    lam0 = eigendecompose(s0, vectors=False).eigenvalues
    lam_t = eigendecompose(s_t, vectors=False).eigenvalues
    rows.append(("spectrum_drift", float(np.max(np.abs(lam_t - lam0)))))
    return rows
