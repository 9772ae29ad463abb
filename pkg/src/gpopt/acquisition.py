"""Point-selection criteria over a posterior-evaluated candidate grid.

Three criteria are supported, all functions of the posterior mean and
standard deviation at a candidate plus the incumbent best score:

- expected improvement:      E[max(0, f - y_best)]
- probability of improvement: P[f > y_best]
- mean value:                 the posterior mean itself

Ties are always broken toward the lowest candidate index so that selection
is deterministic and traces replay exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

EXPECTED_IMPROVEMENT = "expected_improvement"
PROBABILITY_OF_IMPROVEMENT = "probability_of_improvement"
MEAN_VALUE = "mean_value"
CRITERIA = (EXPECTED_IMPROVEMENT, PROBABILITY_OF_IMPROVEMENT, MEAN_VALUE)

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def std_normal_pdf(u):
    """Standard normal density."""
    u = np.asarray(u, dtype=np.float64)
    out = _INV_SQRT_2PI * np.exp(-0.5 * u * u)
    return float(out) if out.ndim == 0 else out


def std_normal_cdf(u):
    """Standard normal CDF (erf-based, accurate to well below 1e-10)."""
    u = np.asarray(u, dtype=np.float64)
    out = ndtr(u)
    return float(out) if out.ndim == 0 else out


def expected_improvement(mean, std, y_best: float):
    """max{0, sigma * [u Phi(u) + phi(u)]} with u = (mean - y_best) / sigma.

    At sigma = 0 the continuous limit max(0, mean - y_best) is used, and the
    deep tails (|u| > 40, where the bracket under- or overflows) collapse to
    their asymptotes 0 and mean - y_best. Accepts scalars or arrays; the
    result is never negative.
    """
    mean = np.asarray(mean, dtype=np.float64)
    std = np.asarray(std, dtype=np.float64)
    with np.errstate(over="ignore"):
        u = np.where(std > 0.0, (mean - y_best) / np.where(std > 0.0, std, 1.0), 0.0)
    uc = np.clip(u, -40.0, 40.0)
    ei = std * (uc * ndtr(uc) + _INV_SQRT_2PI * np.exp(-0.5 * uc * uc))
    ei = np.where(u > 40.0, mean - y_best, ei)
    ei = np.where(std > 0.0, ei, mean - y_best)
    ei = np.maximum(ei, 0.0)
    return float(ei) if ei.ndim == 0 else ei


def probability_of_improvement(mean, std, y_best: float):
    """Phi((mean - y_best) / sigma); a 0/1 step at sigma = 0."""
    mean = np.asarray(mean, dtype=np.float64)
    std = np.asarray(std, dtype=np.float64)
    with np.errstate(over="ignore"):
        u = np.where(std > 0.0, (mean - y_best) / np.where(std > 0.0, std, 1.0), 0.0)
    pi = ndtr(u)
    pi = np.where(std > 0.0, pi, (mean > y_best).astype(np.float64))
    return float(pi) if pi.ndim == 0 else pi


def criterion_values(criterion: str, means, stds, y_best: float) -> np.ndarray:
    if criterion == EXPECTED_IMPROVEMENT:
        return np.asarray(expected_improvement(means, stds, y_best))
    if criterion == PROBABILITY_OF_IMPROVEMENT:
        return np.asarray(probability_of_improvement(means, stds, y_best))
    if criterion == MEAN_VALUE:
        return np.asarray(means, dtype=np.float64)
    raise ValueError(f"unknown criterion {criterion!r}; expected one of {CRITERIA}")


@dataclass(frozen=True)
class PosteriorGrid:
    """Posterior mean/std evaluated at an ordered candidate set."""

    candidates: np.ndarray
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        if not (len(self.candidates) == len(self.means) == len(self.stds)):
            raise ValueError("candidates, means and stds must have equal length")
        if len(self.candidates) < 1:
            raise ValueError("grid must contain at least one candidate")
        if np.any(self.stds < 0.0):
            raise ValueError("stds must be non-negative")

    def __len__(self) -> int:
        return len(self.candidates)

    def take(self, indices) -> "PosteriorGrid":
        """Sub-grid restricted to the given candidate indices."""
        idx = np.asarray(indices, dtype=np.intp)
        return PosteriorGrid(self.candidates[idx], self.means[idx], self.stds[idx])


@dataclass(frozen=True)
class AcquisitionChoice:
    """A selected candidate: its grid index, coordinates, and score."""

    index: int
    theta: np.ndarray
    score: float
    criterion: str


def evaluate_grid(gp, candidates) -> PosteriorGrid:
    """Posterior mean and standard deviation at every candidate, preserving
    the candidate enumeration order."""
    candidates = np.asarray(candidates, dtype=np.float64)
    means, stds = gp.predict(candidates, return_std=True)
    return PosteriorGrid(candidates=candidates, means=means, stds=stds)


def select_next(grid: PosteriorGrid, criterion: str, y_best: float) -> AcquisitionChoice:
    """Candidate maximizing the criterion; ties go to the lowest index."""
    values = criterion_values(criterion, grid.means, grid.stds, y_best)
    idx = int(np.argmax(values))
    return AcquisitionChoice(
        index=idx, theta=grid.candidates[idx], score=float(values[idx]), criterion=criterion
    )


def max_uncertainty_point(grid: PosteriorGrid) -> AcquisitionChoice:
    """Candidate of maximal posterior standard deviation; ties go to the
    lowest index."""
    idx = int(np.argmax(grid.stds))
    return AcquisitionChoice(
        index=idx, theta=grid.candidates[idx], score=float(grid.stds[idx]), criterion="max_std"
    )
