"""Kernel layer: quadrature grid, equilibrium profiles, dressing, T^dr."""

import math

import numpy as np
import pytest
import scipy.special
from scipy.integrate import quad

from toda_hydro.kernels import (
    GridResolutionError,
    KernelSet,
    QuadratureGrid,
    bilinear_C,
    diffusivity,
    digamma,
    dress,
    dressed_profiles,
    equilibrium_profiles,
    operator_F,
    sigma2,
    t_dressed,
    trigamma,
)

ALPHA_QUARTER = 4.2274535333762654     # log(1) - psi(0.25)
PSI1_QUARTER = 17.1973291545071106     # psi'(0.25)


# ---------------------------------------------------------------------------
# special functions


def test_digamma_closed_forms():
    euler = 0.57721566490153286
    assert abs(digamma(1.0) + euler) < 1e-14
    assert abs(digamma(0.5) + euler + 2.0 * math.log(2.0)) < 1e-13
    # recurrence psi(x+1) = psi(x) + 1/x across the shift boundary
    for x in (0.1, 0.25, 3.7, 9.9, 25.0):
        assert abs(digamma(x + 1.0) - digamma(x) - 1.0 / x) < 1e-13
    with pytest.raises(ValueError):
        digamma(0.0)


def test_trigamma_closed_forms():
    assert abs(trigamma(1.0) - math.pi**2 / 6.0) < 1e-13
    assert abs(trigamma(0.5) - math.pi**2 / 2.0) < 1e-12
    for x in (0.1, 0.25, 3.7, 9.9, 25.0):
        assert abs(trigamma(x + 1.0) - trigamma(x) + 1.0 / x**2) < 1e-12


def test_special_against_scipy():
    xs = np.concatenate([np.linspace(0.05, 2.0, 17), [5.0, 12.0, 30.0, 100.0]])
    for x in xs:
        assert abs(digamma(float(x)) - scipy.special.digamma(x)) < 1e-12 * max(1, abs(scipy.special.digamma(x)))
        assert abs(trigamma(float(x)) - scipy.special.polygamma(1, x)) < 1e-12 * scipy.special.polygamma(1, x)


# ---------------------------------------------------------------------------
# quadrature grid


def test_grid_integrates_polynomials_exactly():
    grid = QuadratureGrid(3.0, n_panels=4, nodes_per_panel=8)
    x = grid.nodes
    # Gauss-Legendre with 8 nodes per panel is exact through degree 15
    for k in (0, 1, 2, 7, 14):
        exact = (3.0 ** (k + 1) - (-3.0) ** (k + 1)) / (k + 1)
        assert abs(grid.integrate(x**k) - exact) < 1e-12 * max(1.0, abs(exact))


def test_log_kernel_against_adaptive_quad():
    """Product-integration weights vs scipy.quad with the singular point
    declared, for a smooth integrand."""
    grid = QuadratureGrid(4.0, n_panels=40, nodes_per_panel=12)
    f = np.exp(-0.5 * grid.nodes**2)
    Tf = grid.apply_T(f)
    for x in (-2.3, 0.0, 0.7, 3.9):
        ref, _ = quad(
            lambda y, x=x: 2.0 * np.log(abs(x - y)) * np.exp(-0.5 * y * y),
            -4.0, 4.0, points=[x], limit=200,
        )
        i = int(np.argmin(np.abs(grid.nodes - x)))
        got = float(grid.interpolant(Tf)(x)) if abs(grid.nodes[i] - x) > 1e-12 else Tf[i]
        assert abs(got - ref) < 5e-8, (x, got, ref)


def test_interpolant_and_binned_integration():
    grid = QuadratureGrid(12.0)
    prof = equilibrium_profiles(grid, 1.0, 0.5)
    interp = grid.interpolant(prof.rho_beta)
    xs = np.linspace(-11.9, 11.9, 637)
    rel = np.max(np.abs(interp(xs) - prof.rho_beta_at(xs))
                 / (np.abs(prof.rho_beta_at(xs)) + 1e-300))
    assert rel < 1e-9
    edges = np.linspace(-12.0, 12.0, 101)
    total = sum(grid.integrate_between(prof.rho, a, b)
                for a, b in zip(edges[:-1], edges[1:]))
    assert abs(total - grid.integrate(prof.rho)) < 1e-12


# ---------------------------------------------------------------------------
# equilibrium profiles


@pytest.mark.parametrize("beta,theta", [(1.0, 0.25), (1.0, 0.5), (2.0, 1.0)])
def test_profile_mass_moments_parity(beta, theta):
    grid = QuadratureGrid(12.0 / math.sqrt(beta))
    prof = equilibrium_profiles(grid, beta, theta)
    assert prof.mass_defect_rho_beta < 1e-6
    assert prof.mass_defect_rho < 1e-6
    assert abs(grid.integrate(grid.nodes * prof.rho)) < 1e-8
    second = grid.integrate(grid.nodes**2 * prof.rho)
    assert abs(second - (1.0 + 2.0 * theta) / beta) < 1e-6
    assert np.max(np.abs(prof.rho - prof.rho[::-1])) < 1e-9
    assert np.max(np.abs(prof.rho_beta - prof.rho_beta[::-1])) < 1e-9


def test_alpha_oracle_value():
    grid = QuadratureGrid(12.0)
    prof = equilibrium_profiles(grid, 1.0, 0.25)
    assert abs(prof.alpha - ALPHA_QUARTER) < 1e-12


def test_coarse_grid_is_rejected():
    # 16 nodes cannot normalize the density; the named diagnostic must fire
    grid = QuadratureGrid(12.0, n_panels=2, nodes_per_panel=8)
    with pytest.raises(GridResolutionError, match="mass defect"):
        equilibrium_profiles(grid, 1.0, 0.25)
    with pytest.raises(ValueError):
        QuadratureGrid(12.0, n_panels=1, nodes_per_panel=16)


# ---------------------------------------------------------------------------
# dressing


@pytest.mark.parametrize("beta,theta", [(1.0, 0.25), (1.0, 0.5), (2.0, 1.0)])
def test_dressing_chain_identities(beta, theta):
    grid = QuadratureGrid(12.0 / math.sqrt(beta))
    prof = equilibrium_profiles(grid, beta, theta)
    dp = dressed_profiles(grid, prof)
    alpha = prof.alpha
    # variance chain down to the trigamma
    val = alpha**2 * grid.integrate(dp.s0_dr**2 * prof.rho)
    assert abs(val - trigamma(theta)) < 5e-3 * trigamma(theta)
    # density identity, both arrangements
    assert np.max(np.abs(prof.rho - alpha * theta * dp.s0_dr * prof.rho_beta)) < 1e-5
    assert np.max(np.abs(dp.s0_dr - (grid.apply_T(prof.rho) + alpha) / alpha)) < 1e-5
    # velocity identity
    vt = dp.s0_dr * dp.v_eff - grid.apply_T(prof.rho * dp.v_eff) / alpha
    assert np.max(np.abs(vt - grid.nodes)) < 1e-6
    # forward residuals of the resolvent solve
    for fd, f in ((dp.s0_dr, np.ones(grid.size)), (dp.s1_dr, grid.nodes)):
        fwd = fd - 2.0 * theta * (grid.log_kernel @ (prof.rho_beta * fd))
        assert np.max(np.abs(fwd - f)) < 1e-8 * max(1.0, np.max(np.abs(f)))
    # parity
    assert np.max(np.abs(dp.v_eff + dp.v_eff[::-1])) < 1e-6
    assert np.max(np.abs(dp.s0_dr - dp.s0_dr[::-1])) < 1e-7


def test_free_limit_dressing_is_identity():
    grid = QuadratureGrid(12.0)
    prof = equilibrium_profiles(grid, 1.0, 0.0)
    f = np.sin(grid.nodes)
    assert np.max(np.abs(dress(grid, prof, f) - f)) == 0.0
    dp = dressed_profiles(grid, prof)
    assert np.max(np.abs(dp.v_eff - grid.nodes)) == 0.0


def test_operator_F_and_bilinear(kern):
    grid, prof, dp = kern.grid, kern.profiles, kern.dressed
    # constants are annihilated
    h = operator_F(grid, prof, dp, 3.7 * np.ones(grid.size))
    assert np.max(np.abs(h)) < 1e-10
    f1 = operator_F(grid, prof, dp, grid.nodes)
    assert np.max(np.abs(f1 - dp.s1_dr)) < 1e-10
    assert abs(grid.integrate(f1**2 * prof.rho) - 1.0) < 5e-3
    # bilinear form: C(s0, s0) recovers the trigamma, and is symmetric
    c00 = bilinear_C(grid, prof, dp, np.ones(grid.size), np.ones(grid.size))
    assert abs(c00 - PSI1_QUARTER) < 5e-3 * PSI1_QUARTER
    p1 = grid.nodes**2 - 0.3 * grid.nodes
    p2 = 0.5 * grid.nodes**3 + 1.1
    assert abs(bilinear_C(grid, prof, dp, p1, p2)
               - bilinear_C(grid, prof, dp, p2, p1)) < 1e-10
    # sigma2 routes: projection form vs ||F phi||^2 in L2(rho)
    s_a = sigma2(grid, prof, dp, p1)
    s_b = grid.integrate(operator_F(grid, prof, dp, p1) ** 2 * prof.rho)
    assert abs(s_a - s_b) < 1e-8 * abs(s_a)
    assert sigma2(grid, prof, dp, 2.5 * np.ones(grid.size)) < 1e-10
    assert abs(sigma2(grid, prof, dp, grid.nodes) - 1.0) < 5e-3
    # second-charge variance at (1, 0.25): 2/beta^2 + 4 theta/beta^2 = 3
    assert abs(sigma2(grid, prof, dp, grid.nodes**2) - 3.0) < 5e-3 * 3.0


def test_velocity_map(kern):
    vm = kern.dressed.velocity
    grid = kern.grid
    idx = np.arange(40, grid.size - 40, 97)
    err = np.max(np.abs(vm.inverse(kern.dressed.v_eff[idx]) - grid.nodes[idx]))
    assert err < 1e-9
    assert abs(float(vm(0.0))) < 1e-12
    assert np.all(np.diff(kern.dressed.v_eff) > 0.0)


# ---------------------------------------------------------------------------
# the dressed log kernel


def test_t_dressed_free_limit():
    grid = QuadratureGrid(12.0)
    prof = equilibrium_profiles(grid, 1.0, 0.0)
    lam = 0.731
    sol = t_dressed(grid, prof, lam)
    away = np.abs(grid.nodes - lam) > 1e-6
    ref = 2.0 * np.log(np.abs(grid.nodes[away] - lam))
    assert np.max(np.abs(sol.nodes_value[away] - ref)) < 1e-10


def test_t_dressed_symmetry(kern):
    grid, prof = kern.grid, kern.profiles
    rng = np.random.default_rng(7)
    idx = rng.choice(grid.size, size=(20, 2), replace=False)
    worst = 0.0
    for i, j in idx:
        if i == j:
            continue
        si = kern.t_solution(float(grid.nodes[i]))
        sj = kern.t_solution(float(grid.nodes[j]))
        worst = max(worst, abs(sj.nodes_value[i] - si.nodes_value[j]))
    assert worst < 1e-6


def test_t_dressed_evaluate_consistent(kern):
    sol = kern.t_solution(0.0)
    nodes = kern.grid.nodes
    sub = np.abs(nodes) > 1e-3
    ev = sol.evaluate(nodes[sub])
    assert np.max(np.abs(ev - sol.nodes_value[sub])) < 1e-9


def test_diffusivity_value_and_parity(kern):
    grid, prof, dp = kern.grid, kern.profiles, kern.dressed
    d0 = diffusivity(grid, prof, dp, 0.0)
    # frozen after grid-doubling self-convergence (rel. change < 1e-8)
    assert abs(d0 - 0.24883284052155055) < 1e-6
    for lam in (0.9, 2.4):
        dpos = diffusivity(grid, prof, dp, lam)
        dneg = diffusivity(grid, prof, dp, -lam)
        assert abs(dpos - dneg) < 1e-6 * dpos
        assert dpos > 0.0
