"""File emission for campaign traces, posterior dumps, and seed-sweep
summaries.

All writes are atomic (temp file in the target directory, then rename) and
render floats at full round-trip precision, so identical campaigns produce
byte-identical files.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile

import numpy as np

from .campaign import MOVE_INIT, CampaignResult, TraceRecord


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def _atomic_write(path, write_fn) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            write_fn(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trace_header(dims: int) -> list[str]:
    return (
        ["iter", "move"]
        + [f"theta_{d}" for d in range(dims)]
        + ["y", "y_best", "acq_value", "max_std", "rho", "threshold_used", "nu"]
    )


def write_trace(records, path) -> None:
    """CSV dump of a campaign trace; absent fields render as empty cells."""
    records = list(records)
    if not records:
        raise ValueError("refusing to write an empty trace")
    dims = len(records[0].theta)

    def emit(fh):
        writer = csv.writer(fh)
        writer.writerow(trace_header(dims))
        for r in records:
            writer.writerow(
                [str(r.iter), r.move]
                + [_fmt(v) for v in r.theta]
                + [
                    _fmt(r.y),
                    _fmt(r.y_best),
                    _fmt(r.acq_value),
                    _fmt(r.max_std),
                    _fmt(r.rho),
                    _fmt(r.threshold_used),
                    _fmt(r.nu),
                ]
            )

    _atomic_write(path, emit)


def read_trace(path) -> list[TraceRecord]:
    """Reconstruct trace records from a file written by write_trace."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    dims = sum(1 for h in header if h.startswith("theta_"))
    out = []
    for row in rows[1:]:
        values = dict(zip(header, row))
        theta = np.array([float(values[f"theta_{d}"]) for d in range(dims)])

        def opt(name):
            return float(values[name]) if values[name] != "" else None

        out.append(
            TraceRecord(
                iter=int(values["iter"]),
                move=values["move"],
                theta=theta,
                y=float(values["y"]),
                y_best=float(values["y_best"]),
                acq_value=opt("acq_value"),
                max_std=opt("max_std"),
                rho=opt("rho"),
                threshold_used=opt("threshold_used"),
                nu=opt("nu"),
            )
        )
    return out


def dump_posterior(grid, X_observed, y_observed, iteration: int, directory) -> None:
    """Write posterior_<iter>.csv (candidate, mean, std per row) and the
    matching observations_<iter>.csv snapshot."""
    dims = grid.candidates.shape[1]

    def emit_posterior(fh):
        writer = csv.writer(fh)
        writer.writerow([f"theta_{d}" for d in range(dims)] + ["mean", "std"])
        for cand, mean, std in zip(grid.candidates, grid.means, grid.stds):
            writer.writerow([_fmt(v) for v in cand] + [_fmt(mean), _fmt(std)])

    def emit_observations(fh):
        writer = csv.writer(fh)
        writer.writerow([f"theta_{d}" for d in range(dims)] + ["y"])
        for row, val in zip(X_observed, y_observed):
            writer.writerow([_fmt(v) for v in row] + [_fmt(val)])

    _atomic_write(os.path.join(directory, f"posterior_{iteration}.csv"), emit_posterior)
    _atomic_write(os.path.join(directory, f"observations_{iteration}.csv"), emit_observations)


def iterations_used(result: CampaignResult) -> int:
    """Number of post-initialization evaluations in a campaign."""
    return sum(1 for r in result.trace if r.move != MOVE_INIT)


def _aggregate(values) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return {
        "Average": float(arr.mean()),
        "Minimum": float(arr.min()),
        "Maximum": float(arr.max()),
        "Standard Deviation": std,
    }


def summary_report(seeds, results) -> dict:
    """Per-seed rows plus aggregate statistics over y_best and iteration
    counts, keyed by the Table-style statistic names."""
    per_seed = []
    for seed, result in zip(seeds, results):
        found = result.theta_best is not None
        per_seed.append(
            {
                "seed": int(seed),
                "theta_best": [float(v) for v in np.atleast_1d(result.theta_best)] if found else None,
                "y_best": float(result.y_best) if found else None,
                "iterations_used": iterations_used(result),
                "stop_reason": result.stop_reason,
                **({"error": result.error} if result.error else {}),
            }
        )
    y_values = [row["y_best"] for row in per_seed if row["y_best"] is not None]
    return {
        "per_seed": per_seed,
        "aggregate": {
            "y_best": _aggregate(y_values) if y_values else None,
            "iterations_used": _aggregate([row["iterations_used"] for row in per_seed]),
        },
    }


def write_summary(report: dict, path) -> None:
    _atomic_write(path, lambda fh: json.dump(report, fh, indent=2, sort_keys=True))
