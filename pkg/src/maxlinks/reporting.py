"""Report files (CSV + JSON summary) and the key=value config file format.

Given the same records, every writer produces byte-identical output. The
per-trial wall-time column is the one field that varies between otherwise
identical runs; everything else is fully determined by (config, seed).
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict
from typing import Sequence

from ._version import __version__
from .errors import ParameterError
from .fitting import FitParams
from .harness import CellAggregate, RunResult, TrialRecord, running_mean

TRIALS_HEADER = ["trial", "scheme", "K", "M", "pt_dbm", "n_max", "idf_calls", "ms"]
AGGREGATE_HEADER = ["scheme", "K", "M", "pt_dbm", "mean_nmax", "stderr",
                    "mean_idf_calls", "trials"]


def _fmt(x: float) -> str:
    return format(x, "g")


def write_trials_csv(records: Sequence[TrialRecord], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRIALS_HEADER)
        for r in records:
            writer.writerow([r.trial, r.scheme.value, r.pair_count,
                             r.rx_antennas, _fmt(r.pt_dbm), r.n_max,
                             r.idf_calls, format(r.ms, ".3f")])


def write_aggregate_csv(aggregates: Sequence[CellAggregate], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AGGREGATE_HEADER)
        for a in aggregates:
            writer.writerow([a.scheme.value, a.pair_count, a.rx_antennas,
                             _fmt(a.pt_dbm), format(a.mean_nmax, ".6f"),
                             format(a.stderr, ".6f"),
                             format(a.mean_idf_calls, ".6f"), a.trials])


def read_aggregate_csv(path: str) -> list[dict]:
    """Rows of an aggregate CSV with numeric fields parsed."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(AGGREGATE_HEADER) - set(reader.fieldnames or [])
        if missing:
            raise ParameterError(f"aggregate CSV is missing columns: {sorted(missing)}")
        for row in reader:
            rows.append({
                "scheme": row["scheme"],
                "K": int(row["K"]),
                "M": int(row["M"]),
                "pt_dbm": float(row["pt_dbm"]),
                "mean_nmax": float(row["mean_nmax"]),
                "stderr": float(row["stderr"]),
                "mean_idf_calls": float(row["mean_idf_calls"]),
                "trials": int(row["trials"]),
            })
    return rows


def _fit_dict(fit: FitParams | None) -> dict | None:
    if fit is None:
        return None
    return {"a1": fit.a1, "b1": fit.b1, "a2": fit.a2, "b2": fit.b2,
            "residuals_low": fit.residuals_low.tolist(),
            "residuals_high": fit.residuals_high.tolist()}


def write_summary_json(run: RunResult, path: str,
                       fits: dict[str, FitParams] | None = None) -> None:
    config = run.config
    convergence = {}
    for cell in run.cells:
        key = (f"{cell.scheme.value},K={cell.pair_count},M={cell.rx_antennas},"
               f"pt={_fmt(cell.pt_dbm)}dBm")
        values = [r.n_max for r in run.records_for(cell)]
        convergence[key] = running_mean(values).tolist()
    payload = {
        "version": __version__,
        "seed": config.master_seed,
        "config": {
            "params": asdict(config.params),
            "schemes": [s.value for s in config.schemes],
            "pair_counts": list(config.pair_counts),
            "antenna_counts": list(config.antenna_counts),
            "pt_dbm_values": (list(config.pt_dbm_values)
                              if config.pt_dbm_values is not None else None),
            "trials": config.trials,
            # worker count changes execution, never results, so it is not
            # part of the reproducible identity echoed here
        },
        "aggregates": [
            {"scheme": a.scheme.value, "K": a.pair_count, "M": a.rx_antennas,
             "pt_dbm": a.pt_dbm, "mean_nmax": a.mean_nmax, "stderr": a.stderr,
             "mean_idf_calls": a.mean_idf_calls, "trials": a.trials}
            for a in run.aggregates
        ],
        "running_mean_nmax": convergence,
        "fits": {name: _fit_dict(fit) for name, fit in (fits or {}).items()},
        "failed_trials": len(run.failures),
        "empty_run": len(run.records) == 0,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def emit_report(run: RunResult, out_dir: str,
                fits: dict[str, FitParams] | None = None) -> dict[str, str]:
    """Write trials.csv, aggregate.csv and summary.json into out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "trials": os.path.join(out_dir, "trials.csv"),
        "aggregate": os.path.join(out_dir, "aggregate.csv"),
        "summary": os.path.join(out_dir, "summary.json"),
    }
    write_trials_csv(run.records, paths["trials"])
    write_aggregate_csv(run.aggregates, paths["aggregate"])
    write_summary_json(run, paths["summary"], fits=fits)
    return paths


def load_config_file(path: str) -> dict[str, str]:
    """Flat key=value file with # comments and blank lines."""
    values: dict[str, str] = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ParameterError(
                        f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
                key, value = line.split("=", 1)
                key = key.strip()
                if not key:
                    raise ParameterError(f"{path}:{lineno}: empty key")
                values[key] = value.strip()
    except OSError as exc:
        raise ParameterError(f"cannot read config file {path}: {exc}") from exc
    return values
