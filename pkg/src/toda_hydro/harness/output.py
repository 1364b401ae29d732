"""Result serialization: per-observable CSV rows and a JSON run summary.

CSV files are byte-stable for a fixed (config, seed): floats are printed
with %.17g and row order follows the observable list.  The JSON summary
carries the effective configuration echo plus wall-clock runtime, so it
is the one artifact that differs between identical reruns.
"""

import csv
import dataclasses
import json
import os

__all__ = ["echo_config", "write_results_csv", "write_summary_json"]

_CSV_HEADER = (
    "experiment", "id", "mean", "variance", "std_error", "count",
    "predicted", "z_score",
)


def _fmt(value):
    if value is None:
        return ""
    return "%.17g" % value


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def write_results_csv(path, experiment, stats_list):
    """One row per EnsembleStats, fixed column layout."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for s in stats_list:
            writer.writerow([
                experiment, s.id, _fmt(s.mean), _fmt(s.variance),
                _fmt(s.std_error), str(s.count), _fmt(s.predicted),
                _fmt(s.z_score),
            ])


def write_summary_json(path, config, seed, stats_list, runtime_seconds,
                       extra=None):
    results = [
        {
            "id": s.id,
            "mean": s.mean,
            "variance": s.variance,
            "std_error": s.std_error,
            "predicted": s.predicted,
            "z_score": s.z_score,
        }
        for s in stats_list
    ]
    payload = {
        "config": _jsonable(config),
        "seed": seed,
        "results": results,
        "runtime_seconds": runtime_seconds,
    }
    if extra:
        payload.update(_jsonable(extra))
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def echo_config(out_dir, config):
    """Write the exact effective configuration into the output directory."""
    path = os.path.join(out_dir, "config_effective.json")
    with open(path, "w") as fh:
        json.dump(_jsonable(config), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
