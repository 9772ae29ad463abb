"""Command-line campaign runner.

    gpopt run --config <path> [--jobs N]
    gpopt validate --config <path>

``run`` executes one campaign per configured seed (optionally in parallel
processes), writes a trace CSV per seed, optional per-iteration posterior
dumps, and a JSON summary. Exit codes: 0 success, 2 configuration error,
3 objective failure, 4 I/O error. Every error path prints a single
``GPOPT-*-ERROR:`` line to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from .campaign import STOP_OBJECTIVE_FAILURE, run_campaign
from .config import ConfigError, RunSettings, build_objective, parse_config
from .datasets import MissingLabel, ParseError
from .objectives import ObjectiveFailure
from .trace_io import dump_posterior, summary_report, write_summary, write_trace

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_OBJECTIVE = 3
EXIT_IO = 4


def _run_one_seed(task):
    """Worker: run a single campaign (used directly and via process pools)."""
    settings, seed = task
    objective = build_objective(settings)
    cfg = replace(settings.campaign, seed=seed)
    posterior_dir = settings.posterior_dir_for(seed)
    observer = None
    if posterior_dir is not None:
        os.makedirs(posterior_dir, exist_ok=True)

        def observer(n_evals, gp, grid, X, y):
            dump_posterior(grid, X, y, n_evals, posterior_dir)

    result = run_campaign(settings.space, objective, settings.init_thetas, cfg, observer)
    return seed, result


def _cmd_validate(config_path: str) -> int:
    settings = parse_config(config_path)
    print(
        f"config OK: {settings.objective_kind} objective, "
        f"{settings.campaign.algorithm} algorithm, {len(settings.seeds)} seed(s)"
    )
    return EXIT_OK


def _cmd_run(config_path: str, jobs: int) -> int:
    settings = parse_config(config_path)
    build_objective(settings)  # surface dataset problems before any campaign

    tasks = [(settings, seed) for seed in settings.seeds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = dict(pool.map(_run_one_seed, tasks))
    else:
        outcomes = dict(map(_run_one_seed, tasks))

    results = [outcomes[seed] for seed in settings.seeds]
    for seed, result in zip(settings.seeds, results):
        if result.trace:
            write_trace(result.trace, settings.trace_path_for(seed))
        at = result.theta_best.tolist() if result.theta_best is not None else "n/a"
        print(
            f"seed {seed}: y_best={result.y_best!r} at {at} "
            f"({result.stop_reason}, {sum(1 for r in result.trace if r.move != 'Init')} iterations)"
        )
    write_summary(summary_report(settings.seeds, results), settings.summary_path)

    failures = [r for r in results if r.stop_reason == STOP_OBJECTIVE_FAILURE]
    if failures:
        print(f"GPOPT-OBJECTIVE-ERROR: {failures[0].error}", file=sys.stderr)
        return EXIT_OBJECTIVE
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="gpopt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute the configured seed sweep")
    run_p.add_argument("--config", required=True, help="path to the YAML run configuration")
    run_p.add_argument("--jobs", type=int, default=1, help="parallel campaigns (default 1)")

    val_p = sub.add_parser("validate", help="parse and validate a configuration, run nothing")
    val_p.add_argument("--config", required=True, help="path to the YAML run configuration")

    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return _cmd_validate(args.config)
        return _cmd_run(args.config, max(1, args.jobs))
    except (ConfigError, ParseError, MissingLabel) as exc:
        print(f"GPOPT-CONFIG-ERROR: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ObjectiveFailure as exc:
        print(f"GPOPT-OBJECTIVE-ERROR: {exc}", file=sys.stderr)
        return EXIT_OBJECTIVE
    except OSError as exc:
        print(f"GPOPT-IO-ERROR: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
