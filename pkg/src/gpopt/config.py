"""Run-configuration files: a YAML document describing one seed sweep.

Layout (see README for a complete example):

    objective:
      sinc: {}                      # exactly one of sinc / external / forest
    space:
      lower: [-15.0]
      upper: [15.0]
      grid_points_per_dim: 201
    algorithm:
      name: hybrid                  # original | hybrid | variable_threshold
      criterion: expected_improvement
      tau: 0.8
      max_iters: 20
    init:
      thetas: [[6.6], [7.2], [8.1]]
    seeds: [1, 2, 3]
    output:
      trace_path: out/trace_{seed}.csv
      posterior_dir: out/posterior   # optional
      summary_path: out/summary.json

Every field is validated before any campaign starts; problems raise
ConfigError with the offending field named.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import yaml

from ._validation import as_float_matrix
from .campaign import CampaignConfig
from .datasets import load_csv_dataset
from .objectives import (
    ExternalCommandObjective,
    ForestAccuracyObjective,
    Objective,
    SincObjective,
)
from .space import ParamSpace

OBJECTIVE_KINDS = ("sinc", "external", "forest")


class ConfigError(Exception):
    """A configuration file failed validation; the message names the field."""


@dataclass(frozen=True)
class RunSettings:
    """Everything needed to execute a configured seed sweep."""

    space: ParamSpace
    objective_kind: str
    objective_args: dict
    campaign: CampaignConfig
    init_thetas: np.ndarray
    seeds: tuple[int, ...]
    trace_path: str
    posterior_dir: str | None
    summary_path: str

    def trace_path_for(self, seed: int) -> str:
        return self.trace_path.format(seed=seed)

    def posterior_dir_for(self, seed: int) -> str | None:
        if self.posterior_dir is None:
            return None
        return os.path.join(self.posterior_dir, f"seed_{seed}")


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ConfigError(f"{where}: missing required field {key!r}")
    return mapping[key]


def _as_mapping(value, where: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(value).__name__}")
    return value


def _check_known(mapping: dict, allowed, where: str) -> None:
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")


def _parse_space(section) -> ParamSpace:
    section = _as_mapping(section, "space")
    _check_known(section, ("lower", "upper", "grid_points_per_dim"), "space")
    try:
        return ParamSpace(
            lower=_require(section, "lower", "space"),
            upper=_require(section, "upper", "space"),
            grid_points_per_dim=_require(section, "grid_points_per_dim", "space"),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"space: {exc}") from exc


def _parse_objective(section, space: ParamSpace) -> tuple[str, dict]:
    section = _as_mapping(section, "objective")
    present = [k for k in OBJECTIVE_KINDS if k in section]
    _check_known(section, OBJECTIVE_KINDS, "objective")
    if len(present) != 1:
        raise ConfigError(
            f"objective: exactly one of {OBJECTIVE_KINDS} must be present, found {present or 'none'}"
        )
    kind = present[0]
    args = _as_mapping(section[kind], f"objective.{kind}")
    if kind == "sinc":
        _check_known(args, (), "objective.sinc")
        if space.dims != 1:
            raise ConfigError("objective.sinc: requires a one-dimensional space")
    elif kind == "external":
        _check_known(args, ("command", "deterministic"), "objective.external")
        command = _require(args, "command", "objective.external")
        if not isinstance(command, str) or not command.strip():
            raise ConfigError("objective.external.command: must be a non-empty string")
    else:
        _check_known(
            args,
            (
                "csv_path",
                "label_column",
                "data_seed",
                "holdout_fraction",
                "max_depth",
                "min_leaf",
                "bootstrap",
            ),
            "objective.forest",
        )
        csv_path = _require(args, "csv_path", "objective.forest")
        _require(args, "label_column", "objective.forest")
        if not os.path.exists(csv_path):
            raise ConfigError(f"objective.forest.csv_path: file not found: {csv_path}")
        if space.dims != 1:
            raise ConfigError("objective.forest: requires a one-dimensional space (tree count)")
    return kind, dict(args)


_FLOAT_FIELDS = ("tau", "ei_epsilon", "sigma_epsilon", "alpha0", "noise_var0")
_INT_FIELDS = ("max_iters", "restarts", "seed")


def _parse_algorithm(section) -> CampaignConfig:
    section = _as_mapping(section, "algorithm")
    allowed = (
        "name",
        "criterion",
        "tau",
        "max_iters",
        "ei_epsilon",
        "sigma_epsilon",
        "refit_hyperparams",
        "restarts",
        "kernel",
        "alpha0",
        "gammas0",
        "noise_var0",
    )
    _check_known(section, allowed, "algorithm")
    name = _require(section, "name", "algorithm")
    kwargs = {k: v for k, v in section.items() if k != "name"}
    # YAML reads bare exponents like 1e-5 as strings; coerce numerics here
    for field, cast in [(f, float) for f in _FLOAT_FIELDS] + [(f, int) for f in _INT_FIELDS]:
        if kwargs.get(field) is not None:
            try:
                kwargs[field] = cast(kwargs[field])
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"algorithm.{field}: not a number: {kwargs[field]!r}") from exc
    try:
        return CampaignConfig(algorithm=name, **kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"algorithm: {exc}") from exc


def parse_config(path) -> RunSettings:
    """Parse and fully validate a run-configuration file."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config file: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    doc = _as_mapping(doc, "config")
    _check_known(doc, ("objective", "space", "algorithm", "init", "seeds", "output"), "config")

    space = _parse_space(_require(doc, "space", "config"))
    objective_kind, objective_args = _parse_objective(_require(doc, "objective", "config"), space)
    campaign = _parse_algorithm(_require(doc, "algorithm", "config"))

    init_section = _as_mapping(_require(doc, "init", "config"), "init")
    _check_known(init_section, ("thetas",), "init")
    try:
        init_thetas = as_float_matrix(_require(init_section, "thetas", "init"), "init.thetas")
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"init.thetas: {exc}") from exc
    if init_thetas.shape[1] != space.dims:
        raise ConfigError(
            f"init.thetas: points have {init_thetas.shape[1]} dims, space has {space.dims}"
        )
    for row in init_thetas:
        if not space.contains(row):
            raise ConfigError(f"init.thetas: point {row.tolist()} lies outside the space bounds")

    seeds = _require(doc, "seeds", "config")
    if not isinstance(seeds, list) or not seeds:
        raise ConfigError("seeds: must be a non-empty list of integers")
    for s in seeds:
        if not isinstance(s, int):
            raise ConfigError(f"seeds: {s!r} is not an integer")

    output = _as_mapping(_require(doc, "output", "config"), "output")
    _check_known(output, ("trace_path", "posterior_dir", "summary_path"), "output")
    trace_path = _require(output, "trace_path", "output")
    summary_path = _require(output, "summary_path", "output")
    if len(seeds) > 1 and "{seed}" not in trace_path:
        raise ConfigError(
            "output.trace_path: must contain a {seed} placeholder when sweeping multiple seeds"
        )

    return RunSettings(
        space=space,
        objective_kind=objective_kind,
        objective_args=objective_args,
        campaign=campaign,
        init_thetas=init_thetas,
        seeds=tuple(int(s) for s in seeds),
        trace_path=str(trace_path),
        posterior_dir=str(output["posterior_dir"]) if output.get("posterior_dir") else None,
        summary_path=str(summary_path),
    )


def build_objective(settings: RunSettings) -> Objective:
    """Instantiate the configured objective (loads the forest CSV here)."""
    if settings.objective_kind == "sinc":
        return SincObjective()
    if settings.objective_kind == "external":
        args = settings.objective_args
        return ExternalCommandObjective(
            args["command"], deterministic=bool(args.get("deterministic", False))
        )
    args = dict(settings.objective_args)
    dataset = load_csv_dataset(args.pop("csv_path"), args.pop("label_column"))
    return ForestAccuracyObjective(dataset, **args)
