"""Command-line front end.

One flat JSON config drives every subcommand; --set key=value overrides
individual entries (unknown keys are rejected).  All randomness descends
from a single base seed, so a repeated invocation writes byte-identical
CSV files.  Exit status: 0 success, 1 validation or tolerance failure,
2 usage error.
"""

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from .fluct import from_descriptor
from .harness import (
    EnsembleStats,
    ExperimentConfig,
    WindowError,
    echo_config,
    run_current,
    run_dos,
    run_linstat,
    run_q0,
    run_scattering,
    run_tracer,
    run_twopoint,
    write_results_csv,
    write_summary_json,
)
from .kernels import (
    ConditioningError,
    GridResolutionError,
    KernelSet,
    MonotonicityError,
    digamma,
    dressing_condition,
    trigamma,
)
from .lattice import (
    BlowUpError,
    LatticeConfig,
    charge_field,
    evolve,
    sample_equilibrium,
)

__all__ = ["main", "validate_suite"]

_SUBCOMMANDS = (
    "sample", "evolve", "dos", "kernels", "veff", "twopoint", "current",
    "tracer", "q0", "linstat", "scattering", "validate",
)

DEFAULTS = {
    "beta": 1.0,
    "theta": 0.25,
    "n_sites": 1024,
    "dt": 0.005,
    "integrator": "yoshida4",
    "T_scale": 64.0,
    "tau": 1.0,
    "ensemble_size": 100,
    "bulk_fraction": 0.5,
    "base_seed": 0,
    "m": 1,
    "pairs": [[1, 1]],
    "q": 0.0,
    "q_prime": 0.0,
    "poly": [0.0, 1.0],
    "test_function": {"kind": "cubic_bump", "center": 0.0, "halfwidth": 0.5},
    "bin_center": 0.0,
    "bin_halfwidth": 0.1,
    "lambda_max": None,
    "n_panels": 125,
    "nodes_per_panel": 16,
    "dtheta": None,
    "t_final": 10.0,
    "n_bins": 100,
    "increment_subset": 1000,
}


class UsageError(Exception):
    """Bad invocation: wrong flags, malformed config, unknown keys."""


def _load_config(path, overrides, seed):
    if path is None:
        raise UsageError("--config is required")
    if not os.path.isfile(path):
        raise UsageError("config file not found: %s" % path)
    with open(path) as fh:
        try:
            loaded = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError("config is not valid JSON: %s" % exc) from exc
    if not isinstance(loaded, dict):
        raise UsageError("config root must be a JSON object")
    cfg = dict(DEFAULTS)
    for key, value in loaded.items():
        if key not in DEFAULTS:
            raise UsageError("unknown config key %r" % key)
        cfg[key] = value
    for item in overrides:
        if "=" not in item:
            raise UsageError("override %r is not of the form key=value" % item)
        key, _, raw = item.partition("=")
        if key not in DEFAULTS:
            raise UsageError("unknown override key %r" % key)
        try:
            cfg[key] = json.loads(raw)
        except json.JSONDecodeError:
            cfg[key] = raw
    if seed is not None:
        cfg["base_seed"] = seed
    return cfg


def _lattice(cfg):
    return LatticeConfig(
        beta=cfg["beta"], theta=cfg["theta"], n_sites=cfg["n_sites"],
        dt=cfg["dt"], integrator=cfg["integrator"],
    )


def _experiment(cfg, name):
    return ExperimentConfig(
        lattice=_lattice(cfg), experiment=name, T_scale=cfg["T_scale"],
        tau_list=(cfg["tau"],), m_list=(cfg["m"],),
        q_list=(cfg["q"], cfg["q_prime"]), ensemble_size=cfg["ensemble_size"],
        bulk_fraction=cfg["bulk_fraction"], base_seed=cfg["base_seed"],
    )


def _kernels(cfg):
    return KernelSet.build(
        cfg["beta"], cfg["theta"], lambda_max=cfg["lambda_max"],
        n_panels=cfg["n_panels"], nodes_per_panel=cfg["nodes_per_panel"],
        dtheta=cfg["dtheta"],
    )


def _print_stats(stats_list):
    for s in stats_list:
        line = "%s: mean=%.6g" % (s.id, s.mean)
        if s.predicted is not None:
            line += " predicted=%.6g z=%+.2f" % (s.predicted, s.z_score)
        line += " se=%.3g count=%d" % (s.std_error, s.count)
        print(line)


def _finish(out_dir, name, cfg, stats_list, t0, extra=None):
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        echo_config(out_dir, cfg)
        write_results_csv(os.path.join(out_dir, "results.csv"), name, stats_list)
        write_summary_json(
            os.path.join(out_dir, "summary.json"), cfg, cfg["base_seed"],
            stats_list, time.time() - t0, extra=extra,
        )
    _print_stats(stats_list)


# ---------------------------------------------------------------------------
# deterministic identity suite

def validate_suite(cfg):
    """Every deterministic identity check, as (name, residual, tol) rows.

    No Monte Carlo: kernel identities only.  theta == 0 runs the subset
    that is exact there (the dressing operator is the identity).
    """
    kern = _kernels(cfg)
    grid, prof, dp = kern.grid, kern.profiles, kern.dressed
    theta, beta = kern.theta, kern.beta
    nodes = grid.nodes
    rows = []

    rows.append(("rho_mass_defect", prof.mass_defect_rho, 1e-3))
    rows.append(("rho_beta_mass_defect", prof.mass_defect_rho_beta, 1e-3))

    resid = dp.s0_dr - theta * grid.apply_T(prof.rho_beta * dp.s0_dr) - 1.0
    rows.append(("dressing_residual_s0", float(np.max(np.abs(resid))), 1e-8))
    resid = dp.s1_dr - theta * grid.apply_T(prof.rho_beta * dp.s1_dr) - nodes
    rows.append(("dressing_residual_s1", float(np.max(np.abs(resid))), 1e-8))

    if theta == 0:
        eps = float(np.finfo(float).eps)
        scale = float(np.max(np.abs(nodes)))
        rows.append(("s0_dr_identity", float(np.max(np.abs(dp.s0_dr - 1.0))),
                     4 * eps))
        rows.append(("s1_dr_identity", float(np.max(np.abs(dp.s1_dr - nodes))),
                     4 * eps * scale))
        rows.append(("v_eff_identity", float(np.max(np.abs(dp.v_eff - nodes))),
                     4 * eps * scale))
    else:
        rho0 = kern.alpha * theta * dp.s0_dr * prof.rho_beta
        rows.append(("rho0_identity", float(np.max(np.abs(prof.rho - rho0))), 1e-5))
        # characteristic identity: s0_dr * v_eff - T(rho * v_eff)/alpha = x,
        # i.e. the velocity solves the dressed characteristic equation
        vt = dp.s0_dr * dp.v_eff - grid.apply_T(prof.rho * dp.v_eff) / kern.alpha
        rows.append(("vt_identity", float(np.max(np.abs(vt - nodes))), 1e-6))
        tri = kern.alpha ** 2 * grid.integrate(dp.s0_dr ** 2 * prof.rho)
        target = trigamma(theta)
        rows.append(("trigamma_identity", abs(tri - target), 5e-3 * target))
        mom = grid.integrate(dp.s1_dr ** 2 * prof.rho)
        rows.append(("momentum_identity", abs(mom - 1.0 / beta), 5e-3 / beta))

    rows.append((
        "v_eff_monotone",
        0.0 if bool(np.all(np.diff(dp.v_eff) > 0)) else 1.0,
        0.0,
    ))

    ii = np.linspace(0.10 * grid.size, 0.45 * grid.size, 20).astype(int)
    jj = np.linspace(0.55 * grid.size, 0.90 * grid.size, 20).astype(int)
    sym = 0.0
    for i, j in zip(ii, jj):
        lam_i, lam_j = nodes[i], nodes[j]
        tij = kern.t_solution(lam_i).evaluate(lam_j)
        tji = kern.t_solution(lam_j).evaluate(lam_i)
        sym = max(sym, abs(float(tij) - float(tji)))
    rows.append(("tdr_symmetry", sym, 1e-6))
    return rows


def _cmd_validate(cfg, out_dir, t0):
    rows = validate_suite(cfg)
    failed = [r for r in rows if r[1] > r[2]]
    stats = [
        EnsembleStats(name, resid, 0.0, 0.0, 1, tol,
                      0.0 if resid <= tol else math.inf)
        for name, resid, tol in rows
    ]
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        echo_config(out_dir, cfg)
        write_results_csv(os.path.join(out_dir, "results.csv"), "validate", stats)
        write_summary_json(
            os.path.join(out_dir, "summary.json"), cfg, cfg["base_seed"],
            stats, time.time() - t0,
        )
    for name, resid, tol in rows:
        verdict = "PASS" if resid <= tol else "FAIL"
        print("%-24s residual=%-12.3e tol=%-9.3g %s" % (name, resid, tol, verdict))
    if failed:
        print("validate: %d identity check(s) failed" % len(failed))
        return 1
    print("validate: all %d identity checks passed" % len(rows))
    return 0


# ---------------------------------------------------------------------------
# subcommands

def _cmd_sample(cfg, out_dir, workers, t0):
    state = sample_equilibrium(_lattice(cfg), cfg["base_seed"])
    r = state.r()
    alpha = None
    if cfg["theta"] > 0:
        alpha = math.log(cfg["beta"]) - digamma(cfg["theta"])
    se_r = float(np.std(r, ddof=1) / math.sqrt(r.size))
    stats = [
        EnsembleStats("sample_mean_r", float(np.mean(r)),
                      float(np.var(r, ddof=1)), se_r, r.size, alpha,
                      None if alpha is None
                      else float((np.mean(r) - alpha) / se_r)),
        EnsembleStats("sample_mean_p", float(np.mean(state.p)),
                      float(np.var(state.p, ddof=1)),
                      float(np.std(state.p, ddof=1) / math.sqrt(state.p.size)),
                      state.p.size, None, None),
    ]
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        n1 = state.config.n1
        with open(os.path.join(out_dir, "state.csv"), "w") as fh:
            fh.write("site,q,p\n")
            for k in range(state.config.n_sites):
                fh.write("%d,%.17g,%.17g\n" % (n1 + k, state.q[k], state.p[k]))
    _finish(out_dir, "sample", cfg, stats, t0)
    return 0


def _cmd_evolve(cfg, out_dir, workers, t0):
    state0 = sample_equilibrium(_lattice(cfg), cfg["base_seed"])
    state_t = evolve(state0, cfg["t_final"])
    stats = []
    for m in range(1, 5):
        tr0 = float(charge_field(state0, m).values.sum())
        tr_t = float(charge_field(state_t, m).values.sum())
        denom = max(abs(tr0), float(state0.config.n_sites) ** 0.5)
        stats.append(
            EnsembleStats("trace_drift_m%d" % m, abs(tr_t - tr0) / denom,
                          0.0, 0.0, 1, None, None)
        )
    extra = {"t_final": cfg["t_final"]}
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        n1 = state_t.config.n1
        with open(os.path.join(out_dir, "state_final.csv"), "w") as fh:
            fh.write("site,q,p\n")
            for k in range(state_t.config.n_sites):
                fh.write("%d,%.17g,%.17g\n" % (n1 + k, state_t.q[k], state_t.p[k]))
    _finish(out_dir, "evolve", cfg, stats, t0, extra=extra)
    return 0


def _cmd_kernels(cfg, out_dir, workers, t0):
    kern = _kernels(cfg)
    cond = dressing_condition(kern.grid, kern.profiles)
    extra = {
        "alpha": kern.alpha,
        "condition_estimate": cond,
        "rho_mass_defect": kern.profiles.mass_defect_rho,
    }
    stats = []
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        echo_config(out_dir, cfg)
        kern.to_csv(os.path.join(out_dir, "kernels.csv"))
        write_summary_json(
            os.path.join(out_dir, "summary.json"), cfg, cfg["base_seed"],
            stats, time.time() - t0, extra=extra,
        )
    print("kernels: alpha=%.6g condition=%.3e nodes=%d"
          % (kern.alpha, cond, kern.grid.size))
    return 0


def _cmd_veff(cfg, out_dir, workers, t0):
    kern = _kernels(cfg)
    v = kern.dressed.v_eff
    extra = {"alpha": kern.alpha, "v_eff_max_abs": float(np.max(np.abs(v)))}
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        echo_config(out_dir, cfg)
        with open(os.path.join(out_dir, "veff.csv"), "w") as fh:
            fh.write("lambda,v_eff\n")
            for x, y in zip(kern.grid.nodes, v):
                fh.write("%.17g,%.17g\n" % (x, y))
        write_summary_json(
            os.path.join(out_dir, "summary.json"), cfg, cfg["base_seed"],
            [], time.time() - t0, extra=extra,
        )
    print("veff: strictly increasing on %d nodes, max |v|=%.6g"
          % (kern.grid.size, extra["v_eff_max_abs"]))
    return 0


def _cmd_dos(cfg, out_dir, workers, t0):
    kern = _kernels(cfg)
    out = run_dos(_experiment(cfg, "dos"), kern, workers=workers,
                  n_bins=cfg["n_bins"])
    stats = [out["second_moment"]]
    extra = {"tv_distance": out["tv_distance"]}
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        edges, mass, pred = out["bin_edges"], out["mass"], out["predicted_mass"]
        with open(os.path.join(out_dir, "histogram.csv"), "w") as fh:
            fh.write("bin_lo,bin_hi,mass,predicted_mass\n")
            for b in range(len(mass)):
                fh.write("%.17g,%.17g,%.17g,%.17g\n"
                         % (edges[b], edges[b + 1], mass[b], pred[b]))
    _finish(out_dir, "dos", cfg, stats, t0, extra=extra)
    print("dos: tv_distance=%.4f" % out["tv_distance"])
    return 0


def _cmd_twopoint(cfg, out_dir, workers, t0):
    kern = _kernels(cfg)
    f = from_descriptor(cfg["test_function"])
    ecfg = _experiment(cfg, "twopoint")
    stats = []
    for m, n in cfg["pairs"]:
        stats.extend(
            run_twopoint(ecfg, int(m), int(n), cfg["tau"], f, kern,
                         workers=workers)
        )
    _finish(out_dir, "twopoint", cfg, stats, t0)
    return 0


def _cmd_current(cfg, out_dir, workers, t0):
    kern = _kernels(cfg)
    ecfg = _experiment(cfg, "current")
    stats = run_current(ecfg, cfg["m"], cfg["q"], cfg["q_prime"], cfg["tau"],
                        kern, workers=workers)
    _finish(out_dir, "current", cfg, stats, t0)
    return 0


def _cmd_tracer(cfg, out_dir, workers, t0):
    kern = _kernels(cfg)
    ecfg = _experiment(cfg, "tracer")
    stats, pooled = run_tracer(ecfg, cfg["bin_center"], cfg["bin_halfwidth"],
                               cfg["tau"], kern, workers=workers)
    extra = {"pooled_residuals": int(pooled.size)}
    _finish(out_dir, "tracer", cfg, stats, t0, extra=extra)
    return 0


def _cmd_q0(cfg, out_dir, workers, t0):
    kern = _kernels(cfg)
    ecfg = _experiment(cfg, "q0")
    stats = run_q0(ecfg, cfg["tau"], kern, workers=workers,
                   increment_subset=cfg["increment_subset"])
    _finish(out_dir, "q0", cfg, stats, t0)
    return 0


def _cmd_linstat(cfg, out_dir, workers, t0):
    kern = _kernels(cfg)
    ecfg = _experiment(cfg, "linstat")
    stats = run_linstat(ecfg, cfg["poly"], kern, workers=workers)
    _finish(out_dir, "linstat", cfg, stats, t0)
    return 0


def _cmd_scattering(cfg, out_dir, workers, t0):
    ecfg = _experiment(cfg, "scattering")
    out = run_scattering(ecfg, cfg["tau"], workers=workers)
    stats = [
        EnsembleStats("scattering_median_over_sqrt_t",
                      out["median_over_sqrt_t"], 0.0, 0.0, out["count"],
                      None, None),
        EnsembleStats("scattering_p95_over_sqrt_t",
                      out["p95_over_sqrt_t"], 0.0, 0.0, out["count"],
                      None, None),
    ]
    _finish(out_dir, "scattering", cfg, stats, t0)
    return 0


_DISPATCH = {
    "sample": _cmd_sample,
    "evolve": _cmd_evolve,
    "dos": _cmd_dos,
    "kernels": _cmd_kernels,
    "veff": _cmd_veff,
    "twopoint": _cmd_twopoint,
    "current": _cmd_current,
    "tracer": _cmd_tracer,
    "q0": _cmd_q0,
    "linstat": _cmd_linstat,
    "scattering": _cmd_scattering,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="toda-hydro",
        description="Thermal Toda lattice laboratory",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=False, default=None)
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    t0 = time.time()
    try:
        cfg = _load_config(args.config, args.set, args.seed)
    except UsageError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    workers = args.workers
    if workers is None:
        workers = int(os.environ.get("TODA_HYDRO_THREADS", "1"))
    if workers < 1:
        print("error: workers must be positive", file=sys.stderr)
        return 2
    try:
        if args.subcommand == "validate":
            return _cmd_validate(cfg, args.out, t0)
        return _DISPATCH[args.subcommand](cfg, args.out, workers, t0)
    except (ConditioningError, GridResolutionError, MonotonicityError,
            WindowError, BlowUpError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
