"""Gaussian-process parameter optimization with hybrid exploration.

A small toolkit for sequential model-based optimization over discretized
parameter spaces: GP regression with evidence-learned hyperparameters,
expected-improvement / probability-of-improvement / mean-value selection,
and three campaign loops that trade exploitation against sampling the
highest-uncertainty candidate.
"""

from .acquisition import (
    EXPECTED_IMPROVEMENT,
    MEAN_VALUE,
    PROBABILITY_OF_IMPROVEMENT,
    AcquisitionChoice,
    PosteriorGrid,
    evaluate_grid,
    expected_improvement,
    max_uncertainty_point,
    probability_of_improvement,
    select_next,
    std_normal_cdf,
    std_normal_pdf,
)
from .campaign import (
    ALGORITHMS,
    HYBRID,
    ORIGINAL,
    STOP_BUDGET,
    STOP_CONVERGED,
    STOP_GRID_EXHAUSTED,
    STOP_OBJECTIVE_FAILURE,
    VARIABLE_THRESHOLD,
    CampaignConfig,
    CampaignResult,
    TraceRecord,
    run_campaign,
    run_hybrid,
    run_original,
    run_variable_threshold,
    should_stop,
)
from .config import ConfigError, RunSettings, build_objective, parse_config
from .datasets import (
    Dataset,
    MissingLabel,
    ParseError,
    load_csv_dataset,
    make_synthetic_credit_csv,
    save_csv_dataset,
)
from .forest import (
    CATEGORICAL,
    NUMERIC,
    DecisionTree,
    NoValidSplit,
    RandomForest,
    Split,
    entropy_best_split,
    entropy_from_counts,
)
from .gp import GaussianProcess, log_evidence, maximize_evidence
from .kernels import (
    MATERN52,
    SQUARED_EXPONENTIAL,
    KernelConfig,
    SingularGram,
    gram_matrix,
    kernel_matrix,
    kernel_value,
)
from .objectives import (
    ExternalCommandObjective,
    ForestAccuracyObjective,
    Objective,
    ObjectiveFailure,
    SincObjective,
    sinc_score,
)
from .space import Observation, ParamSpace, stack_observations

__version__ = "0.1.0"

__all__ = [
    "AcquisitionChoice",
    "ALGORITHMS",
    "CampaignConfig",
    "CampaignResult",
    "CATEGORICAL",
    "ConfigError",
    "Dataset",
    "DecisionTree",
    "EXPECTED_IMPROVEMENT",
    "ExternalCommandObjective",
    "ForestAccuracyObjective",
    "GaussianProcess",
    "HYBRID",
    "KernelConfig",
    "MATERN52",
    "MEAN_VALUE",
    "MissingLabel",
    "NoValidSplit",
    "NUMERIC",
    "Objective",
    "ObjectiveFailure",
    "Observation",
    "ORIGINAL",
    "ParamSpace",
    "ParseError",
    "PosteriorGrid",
    "PROBABILITY_OF_IMPROVEMENT",
    "RandomForest",
    "RunSettings",
    "SincObjective",
    "SingularGram",
    "Split",
    "SQUARED_EXPONENTIAL",
    "STOP_BUDGET",
    "STOP_CONVERGED",
    "STOP_GRID_EXHAUSTED",
    "STOP_OBJECTIVE_FAILURE",
    "TraceRecord",
    "VARIABLE_THRESHOLD",
    "build_objective",
    "entropy_best_split",
    "entropy_from_counts",
    "evaluate_grid",
    "expected_improvement",
    "gram_matrix",
    "kernel_matrix",
    "kernel_value",
    "load_csv_dataset",
    "log_evidence",
    "make_synthetic_credit_csv",
    "max_uncertainty_point",
    "maximize_evidence",
    "parse_config",
    "probability_of_improvement",
    "run_campaign",
    "run_hybrid",
    "run_original",
    "run_variable_threshold",
    "save_csv_dataset",
    "select_next",
    "should_stop",
    "sinc_score",
    "stack_observations",
    "std_normal_cdf",
    "std_normal_pdf",
]
