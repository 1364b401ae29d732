from .config import (
    EnsembleStats,
    ExperimentConfig,
    WindowError,
    stats_from_samples,
    variance_stats,
)
from .output import echo_config, write_results_csv, write_summary_json
from .runners import (
    run_conservation,
    run_fluctuation_suite,
    run_current,
    run_dos,
    run_linstat,
    run_q0,
    run_scattering,
    run_stretch,
    run_tracer,
    run_twopoint,
)
from .seeding import sample_seed

__all__ = [
    "EnsembleStats",
    "ExperimentConfig",
    "WindowError",
    "echo_config",
    "run_conservation",
    "run_current",
    "run_dos",
    "run_fluctuation_suite",
    "run_linstat",
    "run_q0",
    "run_scattering",
    "run_stretch",
    "run_tracer",
    "run_twopoint",
    "sample_seed",
    "stats_from_samples",
    "variance_stats",
    "write_results_csv",
    "write_summary_json",
]
