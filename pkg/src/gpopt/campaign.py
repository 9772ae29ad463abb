"""Sequential optimization campaigns over a discretized parameter space.

Three loop variants share the same skeleton: fit a GP to everything evaluated
so far, score the not-yet-evaluated grid candidates, pick a point, evaluate
the objective there, and update the incumbent on strict improvement.

- original: always evaluates the acquisition argmax.
- hybrid: draws rho ~ U(0,1) each iteration and evaluates the acquisition
  argmax when rho < tau, otherwise the highest-uncertainty candidate.
- variable_threshold: like hybrid, but the per-iteration threshold is
  nu * tau where nu is the probability of improvement at the
  highest-uncertainty candidate.

Randomness contract: each campaign owns two independent PCG64 streams spawned
from its seed; stream 0 supplies the branch draws (one per hybrid/variable
iteration, drawn after the GP fit), stream 1 supplies hyperparameter-search
restarts. Identical inputs and seed therefore replay bit-identical traces,
and disabling one consumer never shifts the other stream.

Already-evaluated candidates are masked out of both selections, so a campaign
never spends budget re-measuring a point.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import acquisition as acq
from ._validation import as_float_matrix
from .gp import GaussianProcess, maximize_evidence
from .kernels import SQUARED_EXPONENTIAL, KernelConfig
from .objectives import ObjectiveFailure
from .space import ParamSpace

ORIGINAL = "original"
HYBRID = "hybrid"
VARIABLE_THRESHOLD = "variable_threshold"
ALGORITHMS = (ORIGINAL, HYBRID, VARIABLE_THRESHOLD)

MOVE_INIT = "Init"
MOVE_EXPLOIT = "Exploit"
MOVE_EXPLORE = "Explore"

STOP_BUDGET = "Budget"
STOP_CONVERGED = "Converged"
STOP_GRID_EXHAUSTED = "GridExhausted"
STOP_OBJECTIVE_FAILURE = "ObjectiveFailure"


@dataclass(frozen=True)
class CampaignConfig:
    """Run settings for one campaign.

    ``tau`` is the fixed exploit threshold in [0, 1] for the hybrid
    algorithm, and the basis threshold in [0, inf) scaled by the probability
    of improvement for the variable-threshold algorithm; the original
    algorithm ignores it. ``None`` resolves to 0.8 (hybrid) or 1.0
    (variable threshold).

    Kernel fields set to ``None`` are derived from the initial observations:
    amplitude from the target variance, length-scales from an eighth of the
    per-dimension span, noise variance as 1e-6 times the target variance.
    """

    algorithm: str = ORIGINAL
    criterion: str = acq.EXPECTED_IMPROVEMENT
    tau: float | None = None
    max_iters: int = 20
    ei_epsilon: float = 1e-6
    sigma_epsilon: float = 1e-4
    seed: int = 0
    refit_hyperparams: bool = True
    restarts: int = 3
    kernel: str = SQUARED_EXPONENTIAL
    alpha0: float | None = None
    gammas0: object = None
    noise_var0: float | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.criterion not in acq.CRITERIA:
            raise ValueError(f"unknown criterion {self.criterion!r}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.ei_epsilon <= 0 or self.sigma_epsilon <= 0:
            raise ValueError("ei_epsilon and sigma_epsilon must be > 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        tau = self.resolved_tau()
        if self.algorithm == HYBRID and not 0.0 <= tau <= 1.0:
            raise ValueError(f"hybrid requires tau in [0, 1], got {tau}")
        if self.algorithm == VARIABLE_THRESHOLD and tau < 0.0:
            raise ValueError(f"variable_threshold requires tau >= 0, got {tau}")

    def resolved_tau(self) -> float:
        if self.tau is not None:
            return float(self.tau)
        return 1.0 if self.algorithm == VARIABLE_THRESHOLD else 0.8


@dataclass(frozen=True, eq=False)
class TraceRecord:
    """One audited evaluation: what was measured, why, and the incumbent."""

    iter: int
    move: str
    theta: np.ndarray
    y: float
    y_best: float
    acq_value: float | None = None
    max_std: float | None = None
    rho: float | None = None
    threshold_used: float | None = None
    nu: float | None = None

    def __eq__(self, other):
        if not isinstance(other, TraceRecord):
            return NotImplemented
        return (
            self.iter == other.iter
            and self.move == other.move
            and np.array_equal(self.theta, other.theta)
            and self.y == other.y
            and self.y_best == other.y_best
            and self.acq_value == other.acq_value
            and self.max_std == other.max_std
            and self.rho == other.rho
            and self.threshold_used == other.threshold_used
            and self.nu == other.nu
        )


@dataclass(frozen=True, eq=False)
class CampaignResult:
    theta_best: np.ndarray
    y_best: float
    trace: tuple[TraceRecord, ...]
    stop_reason: str
    error: str | None = None

    def __eq__(self, other):
        if not isinstance(other, CampaignResult):
            return NotImplemented
        return (
            np.array_equal(self.theta_best, other.theta_best)
            and self.y_best == other.y_best
            and self.trace == other.trace
            and self.stop_reason == other.stop_reason
            and self.error == other.error
        )


def should_stop(grid, y_best: float, cfg: CampaignConfig, iter_: int) -> str | None:
    """Stopping rule shared by all algorithms.

    ``grid`` must cover only the not-yet-evaluated candidates. Budget is
    checked first, then grid exhaustion, then convergence: the original
    algorithm converges once the best expected improvement drops below
    ``ei_epsilon``; hybrid and variable-threshold additionally require the
    largest posterior standard deviation to fall below ``sigma_epsilon``
    (otherwise their exploration branch would still have work to do).
    """
    if iter_ >= cfg.max_iters:
        return STOP_BUDGET
    if grid is None or len(grid) == 0:
        return STOP_GRID_EXHAUSTED
    ei_max = float(
        np.max(acq.expected_improvement(grid.means, grid.stds, y_best))
    )
    if ei_max < cfg.ei_epsilon:
        if cfg.algorithm == ORIGINAL:
            return STOP_CONVERGED
        if float(np.max(grid.stds)) < cfg.sigma_epsilon:
            return STOP_CONVERGED
    return None


def _draw_open_unit(rng: np.random.Generator) -> float:
    # uniform on the open interval (0, 1): 0.0 draws are rejected
    rho = float(rng.random())
    while rho == 0.0:
        rho = float(rng.random())
    return rho


def _initial_kernel_config(cfg: CampaignConfig, space: ParamSpace, y_init: np.ndarray) -> KernelConfig:
    var_y = float(np.var(y_init)) if len(y_init) > 1 else 0.0
    alpha = cfg.alpha0 if cfg.alpha0 is not None else (var_y if var_y > 0.0 else 1.0)
    if cfg.gammas0 is not None:
        gammas = np.asarray(cfg.gammas0, dtype=np.float64)
        if gammas.ndim == 0:
            gammas = np.full(space.dims, float(gammas))
    else:
        gammas = (space.upper - space.lower) / 8.0
    noise = cfg.noise_var0 if cfg.noise_var0 is not None else 1e-6 * var_y
    return KernelConfig(kind=cfg.kernel, alpha=alpha, gammas=gammas, noise_var=noise)


class _CampaignState:
    """Mutable bookkeeping for one run."""

    def __init__(self, space: ParamSpace, objective):
        self.space = space
        self.evaluate = objective.evaluate if hasattr(objective, "evaluate") else objective
        self.X: list[np.ndarray] = []
        self.y: list[float] = []
        self.trace: list[TraceRecord] = []
        self.evaluated_mask = np.zeros(space.n_candidates, dtype=bool)
        self.y_best = -np.inf
        self.theta_best: np.ndarray | None = None

    def measure(self, theta: np.ndarray) -> float:
        value = float(self.evaluate(theta))
        if not np.isfinite(value):
            raise ObjectiveFailure(f"objective returned non-finite value {value!r} at {theta!r}")
        return value

    def record(self, theta: np.ndarray, value: float, **fields) -> None:
        if value > self.y_best:
            self.y_best = value
            self.theta_best = theta
        self.X.append(np.asarray(theta, dtype=np.float64))
        self.y.append(value)
        idx = self.space.index_of(theta)
        if idx is not None:
            self.evaluated_mask[idx] = True
        self.trace.append(
            TraceRecord(theta=theta, y=value, y_best=self.y_best, **fields)
        )

    def result(self, stop_reason: str, error: str | None = None) -> CampaignResult:
        return CampaignResult(
            theta_best=self.theta_best,
            y_best=self.y_best,
            trace=tuple(self.trace),
            stop_reason=stop_reason,
            error=error,
        )


def run_campaign(
    space: ParamSpace,
    objective,
    init_thetas,
    cfg: CampaignConfig,
    observer=None,
) -> CampaignResult:
    """Execute one campaign and return its result.

    ``init_thetas`` is one starting point or a sequence of them; each is
    evaluated up front as an Init move (these do not count against
    ``max_iters``). ``observer``, when given, is called after every GP fit as
    ``observer(n_evals_so_far, gp, full_grid, X, y)`` and is intended for
    posterior dumps.

    An objective failure aborts the campaign; the partial trace is returned
    with stop_reason "ObjectiveFailure" and the message in ``result.error``.
    """
    init = as_float_matrix(init_thetas, "init_thetas")
    for row in init:
        if not space.contains(row):
            raise ValueError(f"initial point {row!r} lies outside the space bounds")
    tau = cfg.resolved_tau()
    seeds = np.random.SeedSequence(cfg.seed).spawn(2)
    rho_rng = np.random.Generator(np.random.PCG64(seeds[0]))
    hp_rng = np.random.Generator(np.random.PCG64(seeds[1]))

    state = _CampaignState(space, objective)
    try:
        for row in init:
            value = state.measure(row)
            state.record(row, value, iter=0, move=MOVE_INIT)
    except ObjectiveFailure as exc:
        return state.result(STOP_OBJECTIVE_FAILURE, error=str(exc))

    kernel_config = _initial_kernel_config(cfg, space, np.array(state.y))
    candidates = space.candidates
    n_evals = 0
    stop_reason = None

    while True:
        if n_evals >= cfg.max_iters:
            stop_reason = STOP_BUDGET
            break
        unevaluated = np.flatnonzero(~state.evaluated_mask)
        if len(unevaluated) == 0:
            stop_reason = STOP_GRID_EXHAUSTED
            break

        X = np.stack(state.X)
        y = np.array(state.y)
        if cfg.refit_hyperparams and len(y) >= 2:
            kernel_config = maximize_evidence(
                X, y, kernel_config, n_restarts=cfg.restarts, random_state=hp_rng
            )
        gp = GaussianProcess(
            kernel=kernel_config.kind,
            amplitude=kernel_config.alpha,
            gammas=kernel_config.gammas,
            noise_var=kernel_config.noise_var,
        ).fit(X, y)

        full_grid = acq.evaluate_grid(gp, candidates)
        if observer is not None:
            observer(n_evals, gp, full_grid, X, y)
        masked = full_grid.take(unevaluated)

        stop_reason = should_stop(masked, state.y_best, cfg, n_evals)
        if stop_reason is not None:
            break

        exploit_choice = acq.select_next(masked, cfg.criterion, state.y_best)
        explore_choice = acq.max_uncertainty_point(masked)
        max_std = explore_choice.score

        rho = None
        threshold = None
        nu = None
        if cfg.algorithm == ORIGINAL:
            move, choice = MOVE_EXPLOIT, exploit_choice
        else:
            if cfg.algorithm == VARIABLE_THRESHOLD:
                nu = float(
                    acq.probability_of_improvement(
                        masked.means[explore_choice.index],
                        masked.stds[explore_choice.index],
                        state.y_best,
                    )
                )
                threshold = nu * tau
            else:
                threshold = tau
            rho = _draw_open_unit(rho_rng)
            if rho < threshold:
                move, choice = MOVE_EXPLOIT, exploit_choice
            else:
                move, choice = MOVE_EXPLORE, explore_choice

        theta = choice.theta
        acq_value = float(
            acq.criterion_values(
                cfg.criterion,
                masked.means[choice.index : choice.index + 1],
                masked.stds[choice.index : choice.index + 1],
                state.y_best,
            )[0]
        )
        try:
            value = state.measure(theta)
        except ObjectiveFailure as exc:
            return state.result(STOP_OBJECTIVE_FAILURE, error=str(exc))
        n_evals += 1
        state.record(
            theta,
            value,
            iter=n_evals,
            move=move,
            acq_value=acq_value,
            max_std=max_std,
            rho=rho,
            threshold_used=threshold,
            nu=nu,
        )

    return state.result(stop_reason)


def run_original(space, objective, init_thetas, cfg: CampaignConfig, observer=None) -> CampaignResult:
    return run_campaign(space, objective, init_thetas, replace(cfg, algorithm=ORIGINAL), observer)


def run_hybrid(space, objective, init_thetas, cfg: CampaignConfig, observer=None) -> CampaignResult:
    return run_campaign(space, objective, init_thetas, replace(cfg, algorithm=HYBRID), observer)


def run_variable_threshold(space, objective, init_thetas, cfg: CampaignConfig, observer=None) -> CampaignResult:
    return run_campaign(
        space, objective, init_thetas, replace(cfg, algorithm=VARIABLE_THRESHOLD), observer
    )
