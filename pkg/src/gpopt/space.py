"""Discretized search domains and evaluated observations."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._validation import as_float_vector


@dataclass(frozen=True)
class ParamSpace:
    """A box-bounded parameter domain discretized into a regular grid.

    The candidate set is the Cartesian product of ``grid_points_per_dim``
    evenly spaced values per dimension (bounds inclusive), enumerated in
    row-major order: the last dimension varies fastest.

    Parameters
    ----------
    lower, upper : array-like of shape (dims,)
        Inclusive bounds per dimension; ``lower[d] < upper[d]`` required.
    grid_points_per_dim : int
        Number of grid values along each dimension (>= 2).
    """

    lower: np.ndarray
    upper: np.ndarray
    grid_points_per_dim: int

    def __post_init__(self):
        lo = as_float_vector(self.lower, "lower")
        hi = as_float_vector(self.upper, "upper")
        if lo.shape != hi.shape:
            raise ValueError("lower and upper must have the same length")
        if not np.all(lo < hi):
            raise ValueError("lower must be strictly below upper in every dimension")
        if int(self.grid_points_per_dim) < 2:
            raise ValueError("grid_points_per_dim must be at least 2")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "grid_points_per_dim", int(self.grid_points_per_dim))

    @property
    def dims(self) -> int:
        return self.lower.shape[0]

    @property
    def n_candidates(self) -> int:
        return self.grid_points_per_dim ** self.dims

    @cached_property
    def candidates(self) -> np.ndarray:
        """All grid points as an (n_candidates, dims) array, row-major order."""
        axes = [
            np.linspace(self.lower[d], self.upper[d], self.grid_points_per_dim)
            for d in range(self.dims)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        grid = np.stack([m.ravel(order="C") for m in mesh], axis=-1)
        grid.flags.writeable = False
        return grid

    def contains(self, theta) -> bool:
        """Whether a point lies inside the bounds (inclusive)."""
        t = as_float_vector(theta, "theta")
        if t.shape[0] != self.dims:
            return False
        return bool(np.all(t >= self.lower) and np.all(t <= self.upper))

    def index_of(self, theta) -> int | None:
        """Grid index of ``theta`` if it coincides with a candidate, else None."""
        t = as_float_vector(theta, "theta")
        g = self.grid_points_per_dim
        idx = 0
        for d in range(self.dims):
            step = (self.upper[d] - self.lower[d]) / (g - 1)
            k = int(round((t[d] - self.lower[d]) / step))
            if k < 0 or k >= g:
                return None
            if not np.isclose(self.lower[d] + k * step, t[d], rtol=0.0, atol=1e-9 * max(1.0, abs(step))):
                return None
            idx = idx * g + k
        return idx


@dataclass(frozen=True)
class Observation:
    """One evaluated parameter point and its score."""

    theta: np.ndarray
    y: float

    def __post_init__(self):
        t = as_float_vector(self.theta, "theta")
        t.flags.writeable = False
        object.__setattr__(self, "theta", t)
        object.__setattr__(self, "y", float(self.y))


def stack_observations(observations) -> tuple[np.ndarray, np.ndarray]:
    """Pack a sequence of observations into (X, y) arrays."""
    obs = list(observations)
    if not obs:
        raise ValueError("need at least one observation")
    X = np.stack([o.theta for o in obs])
    y = np.array([o.y for o in obs], dtype=np.float64)
    return X, y
