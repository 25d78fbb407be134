"""SGD driven by the probabilistic line search, and a fixed-rate baseline."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .linesearch import SearchConfig, VanishingGradient, probabilistic_line_search
from .problems import FiniteSumProblem

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StepRecord:
    cum_evals: int
    accepted_alpha: float
    evals_in_search: int
    train_loss: float
    sigma_f: float
    sigma_df: float
    termination: str


@dataclass
class OptimizerTrace:
    method: str
    seed: int
    config: dict
    records: list[StepRecord] = field(default_factory=list)
    x_final: np.ndarray | None = None
    converged: bool = False

    @property
    def evals_per_search(self) -> list[int]:
        return [r.evals_in_search for r in self.records]


def sgd_with_line_search(
    problem: FiniteSumProblem,
    x_init,
    alpha_init: float = 1e-4,
    eval_budget: int = 1000,
    config: SearchConfig = SearchConfig(),
    seed: int = 0,
    batch_size: int = 10,
) -> OptimizerTrace:
    """Steepest descent on mini-batch gradients with line-searched step sizes.

    The budget counts mini-batch evaluations, including the initial one; the
    last search may overrun it by at most ``budget_L + 1`` evaluations.
    """
    if eval_budget < 2:
        raise ValueError("eval_budget must be at least 2")
    if not alpha_init > 0:
        raise ValueError("alpha_init must be positive")
    rng = np.random.default_rng(seed)
    start = problem.evaluations
    if config.exact_noise:
        problem.keep_samples = True  # the exact projection needs per-sample gradients

    def objective(x):
        return problem.evaluate_batch(x, batch_size, rng)

    x = np.array(x_init, dtype=float)
    batch = objective(x)
    alpha, alpha_stats = alpha_init, alpha_init
    trace = OptimizerTrace(
        "problinesearch",
        seed,
        {"alpha_init": alpha_init, "eval_budget": eval_budget, "batch_size": batch_size, **asdict(config)},
    )
    while problem.evaluations - start < eval_budget:
        try:
            out = probabilistic_line_search(objective, x, -batch.grad, batch, alpha, alpha_stats, config)
        except VanishingGradient:
            log.info("gradient vanished after %d evaluations", problem.evaluations - start)
            trace.converged = True
            break
        x, batch = out.x_new, out.batch_at_accept
        alpha, alpha_stats = out.alpha_next, out.alpha_stats
        trace.records.append(
            StepRecord(
                cum_evals=problem.evaluations - start,
                accepted_alpha=out.alpha_accepted,
                evals_in_search=out.evals_used,
                train_loss=batch.loss,
                sigma_f=out.sigma_f,
                sigma_df=out.sigma_df,
                termination=out.termination,
            )
        )
    trace.x_final = x
    return trace


def sgd_fixed_rate(
    problem: FiniteSumProblem,
    x_init,
    alpha: float,
    eval_budget: int = 1000,
    seed: int = 0,
    batch_size: int = 10,
) -> OptimizerTrace:
    """Plain SGD, ``x <- x - alpha * grad``, one evaluation per step."""
    if not alpha > 0:
        raise ValueError("learning rate must be positive")
    if eval_budget < 1:
        raise ValueError("eval_budget must be positive")
    rng = np.random.default_rng(seed)
    start = problem.evaluations
    x = np.array(x_init, dtype=float)
    trace = OptimizerTrace("fixed", seed, {"alpha": alpha, "eval_budget": eval_budget, "batch_size": batch_size})
    with np.errstate(over="ignore", invalid="ignore"):
        while problem.evaluations - start < eval_budget:
            batch = problem.evaluate_batch(x, batch_size, rng)
            sf, sdf = np.sqrt(batch.var_loss), np.sqrt(np.sum(batch.var_grad))
            x = x - alpha * batch.grad
            trace.records.append(
                StepRecord(problem.evaluations - start, alpha, 1, batch.loss, float(sf), float(sdf), "fixed")
            )
    trace.x_final = x
    return trace
