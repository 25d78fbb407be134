"""Probabilistic line search for stochastic gradient descent."""

from .acquisition import Candidate, choose_candidate, expected_improvement, generate_candidates
from .bvn import bvn_rectangle, gauss_cdf, gauss_pdf
from .classic import classic_cubic_interpolant, classic_wolfe_check
from .kernel import WienerKernel
from .linesearch import SearchConfig, SearchOutcome, probabilistic_line_search
from .noise import BatchEvaluation, batch_statistics, exact_projected_variance, project_variance
from .optimizer import OptimizerTrace, sgd_fixed_rate, sgd_with_line_search
from .problems import (
    FiniteSumProblem,
    make_logistic_regression,
    make_noisy_quadratic,
    make_small_mlp,
    make_synthetic_blobs,
)
from .surrogate import SurrogateState, init_surrogate
from .wolfe import WolfeAssessment, is_acceptable, prob_wolfe

__version__ = "0.1.0"
