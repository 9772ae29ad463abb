"""Built-in score functions for optimization campaigns.

Every objective exposes ``evaluate(theta) -> float`` over a declared
parameter space, a human-readable ``description``, and a ``deterministic``
flag. Failures raise ObjectiveFailure, which campaigns convert into an
aborted result carrying the partial trace.
"""

from __future__ import annotations

import math
import shlex
import subprocess

import numpy as np

from ._validation import as_float_vector
from .datasets import Dataset
from .forest import RandomForest


class ObjectiveFailure(Exception):
    """An objective could not produce a score for a requested point."""


class Objective:
    """Interface for score functions; subclasses implement ``evaluate``."""

    description: str = ""
    deterministic: bool = True

    def evaluate(self, theta) -> float:
        raise NotImplementedError

    def __call__(self, theta) -> float:
        return self.evaluate(theta)


def sinc_score(x):
    """sin(x) / (pi * x), continuously extended to 1/pi at x = 0.

    Accepts a scalar or an array.
    """
    x = np.asarray(x, dtype=np.float64)
    safe = np.where(x == 0.0, 1.0, x)
    out = np.where(x == 0.0, 1.0 / math.pi, np.sin(safe) / (math.pi * safe))
    return float(out) if out.ndim == 0 else out


class SincObjective(Objective):
    """The one-dimensional damped-sine toy target."""

    description = "sin(x) / (pi x) with its removable singularity filled in"
    deterministic = True

    def evaluate(self, theta) -> float:
        theta = as_float_vector(theta, "theta")
        if theta.shape[0] != 1:
            raise ObjectiveFailure(f"sinc objective is one-dimensional, got {theta.shape[0]} dims")
        return sinc_score(theta[0])


class ExternalCommandObjective(Objective):
    """Scores a point by running a user command and reading its last stdout line.

    The command template names each coordinate with ``{theta0}`` ...
    ``{thetaD-1}``; values are substituted as full-precision decimal text.
    A nonzero exit status or unparseable output raises ObjectiveFailure with
    the captured output attached for diagnosis.
    """

    def __init__(self, command_template: str, deterministic: bool = False):
        self.command_template = command_template
        self.deterministic = deterministic
        self.description = f"external command: {command_template}"

    def evaluate(self, theta) -> float:
        theta = as_float_vector(theta, "theta")
        substitutions = {f"theta{i}": repr(float(v)) for i, v in enumerate(theta)}
        try:
            command = self.command_template.format(**substitutions)
        except (KeyError, IndexError) as exc:
            raise ObjectiveFailure(
                f"command template {self.command_template!r} has unknown placeholder: {exc}"
            ) from exc
        proc = subprocess.run(
            shlex.split(command), capture_output=True, text=True, check=False
        )
        if proc.returncode != 0:
            raise ObjectiveFailure(
                f"command {command!r} exited with status {proc.returncode}; "
                f"stdout={proc.stdout!r} stderr={proc.stderr!r}"
            )
        lines = [line for line in proc.stdout.splitlines() if line.strip()]
        if not lines:
            raise ObjectiveFailure(f"command {command!r} produced no output to parse")
        try:
            return float(lines[-1].strip())
        except ValueError as exc:
            raise ObjectiveFailure(
                f"command {command!r}: last output line {lines[-1]!r} is not a number"
            ) from exc


class ForestAccuracyObjective(Objective):
    """Holdout accuracy of a bagged entropy forest as a function of the tree
    count (the single campaign parameter, rounded to the nearest integer).

    The train/holdout split is drawn once at construction from ``data_seed``,
    and every forest reuses that same seed for its bootstrap stream, so the
    objective is deterministic and prefix-consistent across tree counts.
    """

    deterministic = True

    def __init__(
        self,
        dataset: Dataset,
        data_seed: int = 0,
        holdout_fraction: float = 0.3,
        max_depth: int = 12,
        min_leaf: int = 2,
        bootstrap: bool = True,
    ):
        if not 0.0 < holdout_fraction < 1.0:
            raise ValueError("holdout_fraction must lie strictly between 0 and 1")
        self.dataset = dataset
        self.data_seed = data_seed
        self.holdout_fraction = holdout_fraction
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.bootstrap = bootstrap
        self.description = f"forest holdout accuracy on {dataset.n_rows} rows"

        rng = np.random.Generator(np.random.PCG64(data_seed))
        perm = rng.permutation(dataset.n_rows)
        n_hold = int(round(holdout_fraction * dataset.n_rows))
        if n_hold < 1 or n_hold >= dataset.n_rows:
            raise ValueError("holdout_fraction leaves an empty split")
        self._hold_idx = perm[:n_hold]
        self._train_idx = perm[n_hold:]
        self._cache: dict[int, float] = {}

    def evaluate(self, theta) -> float:
        theta = as_float_vector(theta, "theta")
        n_trees = int(math.floor(float(theta[0]) + 0.5))
        if n_trees < 1:
            raise ObjectiveFailure(f"tree count must round to >= 1, got theta={theta[0]!r}")
        if n_trees in self._cache:
            return self._cache[n_trees]
        data = self.dataset
        y_train = data.y[self._train_idx]
        if len(np.unique(y_train)) < len(data.classes):
            raise ObjectiveFailure("holdout split leaves a class absent from training data")
        forest = RandomForest(
            n_trees=n_trees,
            max_depth=self.max_depth,
            min_leaf=self.min_leaf,
            bootstrap=self.bootstrap,
            random_state=self.data_seed,
        ).fit(data.X[self._train_idx], y_train, feature_kinds=data.feature_kinds)
        predicted = forest.predict_codes(data.X[self._hold_idx])
        accuracy = float(np.mean(predicted == data.y[self._hold_idx]))
        self._cache[n_trees] = accuracy
        return accuracy
