"""Gaussian process regression with evidence-based hyperparameter learning.

The estimator follows the scikit-learn fit/predict protocol. Fitting centers
the targets by their sample mean, factorizes the regularized Gram matrix once
(Cholesky, with escalating diagonal jitter), and precomputes the dual weights
``w = C^{-1} (y - mean(y))``. Predictions are then

    mean(x)  = mean(y) + k(x)^T w
    var(x)   = k(x, x) - k(x)^T C^{-1} k(x)        (clamped at zero)

where ``k(x)`` is the cross-covariance against the training points.

Hyperparameters are learned by maximizing the Gaussian log marginal
likelihood with a derivative-free coordinate descent in log-space,
multi-started from seeded draws around the data scale.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from sklearn.base import BaseEstimator, RegressorMixin

from ._validation import as_float_matrix, as_float_vector
from .kernels import (
    SQUARED_EXPONENTIAL,
    KernelConfig,
    SingularGram,
    cholesky_with_jitter,
    gram_matrix,
    kernel_matrix,
)

LOG_2PI = math.log(2.0 * math.pi)


def log_evidence(X, y, config: KernelConfig) -> float:
    """Log marginal likelihood of centered targets under ``config``.

    Computed through the Cholesky factor of the regularized Gram matrix:
    -1/2 yc^T C^-1 yc - 1/2 log det C - n/2 log(2 pi).
    """
    X = as_float_matrix(X, "X")
    y = as_float_vector(y, "y")
    yc = y - y.mean()
    C = gram_matrix(X, config)
    L, _ = cholesky_with_jitter(C, config.alpha)
    v = solve_triangular(L, yc, lower=True)
    return float(
        -0.5 * v @ v - np.log(np.diag(L)).sum() - 0.5 * len(y) * LOG_2PI
    )


class GaussianProcess(BaseEstimator, RegressorMixin):
    """GP regressor over a box-bounded parameter domain.

    Parameters
    ----------
    kernel : str
        "squared_exponential" or "matern52".
    amplitude : float
        Kernel amplitude (the prior variance at any single point).
    gammas : float or array-like
        Per-dimension length-scales; a scalar is broadcast at fit time.
    noise_var : float
        Observation-noise variance added to the Gram diagonal.
    optimize_hyperparams : bool
        When True and the training set has at least two points, replace the
        initial hyperparameters by the evidence maximizer before fitting.
    n_restarts : int
        Number of local searches for the evidence maximizer; the first starts
        from the initial values, the rest from seeded random draws.
    random_state : int, numpy Generator, or None
        Seeds the restart draws only.

    Attributes (after fit)
    ----------
    X_train_, y_train_ : training data copies
    config_ : KernelConfig actually used
    L_ : lower Cholesky factor of the regularized Gram matrix
    weights_ : dual weights solving C w = y - y_mean_
    y_mean_ : centering offset
    jitter_ : diagonal jitter the factorization needed (0.0 if none)
    log_evidence_ : log marginal likelihood at ``config_``
    """

    def __init__(
        self,
        kernel: str = SQUARED_EXPONENTIAL,
        amplitude: float = 1.0,
        gammas=1.0,
        noise_var: float = 0.0,
        optimize_hyperparams: bool = False,
        n_restarts: int = 4,
        random_state=None,
    ):
        self.kernel = kernel
        self.amplitude = amplitude
        self.gammas = gammas
        self.noise_var = noise_var
        self.optimize_hyperparams = optimize_hyperparams
        self.n_restarts = n_restarts
        self.random_state = random_state

    def _initial_config(self, n_dims: int) -> KernelConfig:
        g = np.asarray(self.gammas, dtype=np.float64)
        if g.ndim == 0:
            g = np.full(n_dims, float(g))
        return KernelConfig(
            kind=self.kernel, alpha=self.amplitude, gammas=g, noise_var=self.noise_var
        )

    def fit(self, X, y):
        X = as_float_matrix(X, "X")
        y = as_float_vector(y, "y")
        if X.shape[0] != y.shape[0]:
            raise ValueError("X and y must have the same number of rows")
        if X.shape[0] < 1:
            raise ValueError("need at least one observation")

        config = self._initial_config(X.shape[1])
        if self.optimize_hyperparams and X.shape[0] >= 2:
            config = maximize_evidence(
                X, y, config, n_restarts=self.n_restarts, random_state=self.random_state
            )

        self.X_train_ = X.copy()
        self.y_train_ = y.copy()
        self.config_ = config
        self.y_mean_ = float(y.mean())
        yc = y - self.y_mean_
        C = gram_matrix(X, config)
        self.L_, self.jitter_ = cholesky_with_jitter(C, config.alpha)
        self.weights_ = cho_solve((self.L_, True), yc)
        v = solve_triangular(self.L_, yc, lower=True)
        self.log_evidence_ = float(
            -0.5 * v @ v - np.log(np.diag(self.L_)).sum() - 0.5 * len(y) * LOG_2PI
        )
        return self

    def predict(self, X, return_std: bool = False):
        X = as_float_matrix(X, "X")
        k = kernel_matrix(X, self.X_train_, self.config_)
        mean = self.y_mean_ + k @ self.weights_
        if not return_std:
            return mean
        v = solve_triangular(self.L_, k.T, lower=True)
        var = self.config_.alpha - np.einsum("ij,ij->j", v, v)
        np.maximum(var, 0.0, out=var)
        return mean, np.sqrt(var)

    def predict_var(self, X) -> np.ndarray:
        """Posterior variance, clamped at zero to absorb round-off."""
        _, std = self.predict(X, return_std=True)
        return std**2


def _data_scales(X: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """(target variance, per-dimension spans) with unit fallbacks."""
    var_y = float(y.var())
    if var_y <= 0.0:
        var_y = 1.0
    spans = X.max(axis=0) - X.min(axis=0)
    spans = np.where(spans > 0.0, spans, 1.0)
    return var_y, spans


def _pack(config: KernelConfig, noise_floor: float) -> np.ndarray:
    return np.log(
        np.concatenate(
            [[config.alpha], config.gammas, [max(config.noise_var, noise_floor)]]
        )
    )


def _unpack(log_params: np.ndarray, kind: str) -> KernelConfig:
    vals = np.exp(log_params)
    return KernelConfig(kind=kind, alpha=vals[0], gammas=vals[1:-1], noise_var=vals[-1])


def _safe_evidence(X, y, config: KernelConfig) -> float:
    try:
        val = log_evidence(X, y, config)
    except (SingularGram, np.linalg.LinAlgError):
        return -np.inf
    return val if np.isfinite(val) else -np.inf


def _coordinate_descent(X, y, start: np.ndarray, kind: str, max_sweeps: int = 200):
    """Derivative-free ascent of the log evidence in log-parameter space.

    Tries +/- step on each coordinate in turn; halves the step after a sweep
    with no accepted move, stopping once the step drops below 1e-3.
    """

    def objective(p: np.ndarray) -> float:
        if not np.all(np.isfinite(np.exp(p))):
            return -np.inf
        return _safe_evidence(X, y, _unpack(p, kind))

    current = start.copy()
    best = objective(current)
    if not np.isfinite(best):
        return current, best
    step = 1.0
    for _ in range(max_sweeps):
        improved = False
        for i in range(len(current)):
            for direction in (1.0, -1.0):
                trial = current.copy()
                trial[i] += direction * step
                val = objective(trial)
                if val > best:
                    best, current, improved = val, trial, True
                    break
        if not improved:
            step *= 0.5
            if step < 1e-3:
                break
    return current, best


def maximize_evidence(
    X, y, init: KernelConfig, n_restarts: int = 4, random_state=None
) -> KernelConfig:
    """Best hyperparameters found over ``n_restarts`` local searches.

    The first search starts at ``init``; the others at log-uniform draws in
    [1e-3, 1e3] around the data scale (target variance for the amplitude,
    per-dimension spans for the length-scales). The result never scores below
    ``init``: with fewer than two observations or no restarts, ``init`` is
    returned unchanged.
    """
    X = as_float_matrix(X, "X")
    y = as_float_vector(y, "y")
    if X.shape[0] < 2 or n_restarts < 1:
        return init
    rng = np.random.default_rng(random_state)
    var_y, spans = _data_scales(X, y)
    noise_floor = 1e-12 * var_y

    best_score = _safe_evidence(X, y, init)
    best_config = init

    starts = [_pack(init, noise_floor)]
    log_lo, log_hi = np.log(1e-3), np.log(1e3)
    center = np.log(np.concatenate([[var_y], spans, [1e-6 * var_y]]))
    for _ in range(n_restarts - 1):
        draw = rng.uniform(log_lo, log_hi, size=X.shape[1] + 2)
        starts.append(center + draw)

    for start in starts:
        point, score = _coordinate_descent(X, y, start, init.kind)
        if score > best_score:
            best_score = score
            best_config = _unpack(point, init.kind)
    return best_config
