"""Covariance kernels and Gram-matrix construction.

Two stationary kernels are provided, parameterized by an amplitude ``alpha``
and one length-scale ``gamma_d`` per dimension. Both are written in terms of
the scaled squared distance

    G(a, b) = sum_d (a_d - b_d)^2 / (2 * gamma_d^2)

Squared exponential:   k(a, b) = alpha * exp(-G / 2)
Matern 5/2:            k(a, b) = alpha * (1 + sqrt(5 G) + (5/3) G) * exp(-sqrt(5 G))

Note the squared-exponential exponent carries both the leading 1/2 and the
2 gamma^2 denominator, so in one dimension it equals exp(-d^2 / (4 gamma^2));
this is equivalent to a textbook RBF with length-scale gamma * sqrt(2). The
scaling is kept as-is because gamma is a learned quantity.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._validation import as_float_matrix, as_float_vector

SQUARED_EXPONENTIAL = "squared_exponential"
MATERN52 = "matern52"
KERNEL_KINDS = (SQUARED_EXPONENTIAL, MATERN52)


class SingularGram(Exception):
    """Raised when the regularized Gram matrix cannot be factorized."""


@dataclass(frozen=True)
class KernelConfig:
    """Kernel hyperparameters: kind, amplitude, per-dimension length-scales,
    and the observation-noise variance added to the Gram diagonal."""

    kind: str = SQUARED_EXPONENTIAL
    alpha: float = 1.0
    gammas: np.ndarray = 1.0
    noise_var: float = 0.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {KERNEL_KINDS}")
        g = as_float_vector(self.gammas, "gammas")
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not np.all(g > 0.0):
            raise ValueError("every length-scale must be > 0")
        if self.noise_var < 0.0:
            raise ValueError(f"noise_var must be >= 0, got {self.noise_var}")
        g.flags.writeable = False
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "noise_var", float(self.noise_var))

    @property
    def dims(self) -> int:
        return self.gammas.shape[0]

    def with_values(self, **changes) -> "KernelConfig":
        return replace(self, **changes)


def _scaled_sqdist(A: np.ndarray, B: np.ndarray, gammas: np.ndarray) -> np.ndarray:
    """Pairwise G(a, b) = sum_d (a_d - b_d)^2 / (2 gamma_d^2) as an (n, m) array."""
    As = A / (gammas * np.sqrt(2.0))
    Bs = B / (gammas * np.sqrt(2.0))
    diff = As[:, None, :] - Bs[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def kernel_matrix(A, B, config: KernelConfig) -> np.ndarray:
    """Cross-covariance matrix between two point sets (no noise term)."""
    A = as_float_matrix(A, "A")
    B = as_float_matrix(B, "B")
    G = _scaled_sqdist(A, B, config.gammas)
    if config.kind == SQUARED_EXPONENTIAL:
        return config.alpha * np.exp(-0.5 * G)
    root = np.sqrt(5.0 * G)
    return config.alpha * (1.0 + root + (5.0 / 3.0) * G) * np.exp(-root)


def kernel_value(theta_i, theta_j, config: KernelConfig) -> float:
    """Covariance between two single points; symmetric in its arguments."""
    a = as_float_vector(theta_i, "theta_i").reshape(1, -1)
    b = as_float_vector(theta_j, "theta_j").reshape(1, -1)
    return float(kernel_matrix(a, b, config)[0, 0])


def gram_matrix(points, config: KernelConfig, jitter: float = 0.0) -> np.ndarray:
    """Covariance matrix of a point set with ``noise_var + jitter`` added to
    the diagonal. The result is exactly symmetric."""
    P = as_float_matrix(points, "points")
    C = kernel_matrix(P, P, config)
    C = 0.5 * (C + C.T)
    if config.noise_var or jitter:
        C[np.diag_indices_from(C)] += config.noise_var + float(jitter)
    return C


def cholesky_with_jitter(
    C: np.ndarray, alpha: float, initial: float = 1e-10, ceiling: float = 1e-4
) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``C``, escalating a diagonal jitter when the
    plain factorization fails.

    The jitter starts at ``initial * alpha`` and is multiplied by 10 until it
    would exceed ``ceiling * alpha``; raises SingularGram past that point.
    Returns (factor, jitter_used).
    """
    try:
        return np.linalg.cholesky(C), 0.0
    except np.linalg.LinAlgError:
        pass
    jitter = initial * alpha
    limit = ceiling * alpha
    eye = np.eye(C.shape[0])
    while jitter <= limit * (1.0 + 1e-12):
        try:
            return np.linalg.cholesky(C + jitter * eye), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise SingularGram(
        f"Gram matrix of order {C.shape[0]} is not positive definite even with "
        f"jitter {limit:.3e}; check for duplicate data or degenerate hyperparameters"
    )
