"""Probabilistic line search for noisy (mini-batch) objectives.

The search runs in scaled coordinates where the start point has value 0 and
projected gradient -1, and a unit step corresponds to the proposed step
size ``alpha0``. A GP surrogate is refit after every evaluation and the
search stops at the first node whose probability of satisfying the Wolfe
conditions exceeds ``c_W``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .acquisition import ACQUISITION_MODES, CELL_OFFSET, choose_candidate, generate_candidates
from .kernel import WienerKernel
from .noise import BatchEvaluation, clamp_and_scale_noise, exact_projected_variance, project_variance
from .surrogate import DUPLICATE_TOL, SurrogateState, init_surrogate
from .wolfe import prob_wolfe

log = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], BatchEvaluation]
Termination = Literal["wolfe-accept", "budget-lowest-mean", "uphill-retreat"]

MAX_NONFINITE_RETRIES = 3


class NotADescentDirection(ValueError):
    pass


class VanishingGradient(ValueError):
    pass


class NonFiniteObjective(ArithmeticError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    c1: float = 0.05
    c2: float = 0.5
    c_W: float = 0.3
    alpha_ext: float = 1.3
    theta_reset: float = 100.0
    budget_L: int = 6
    tau: float = 10.0
    gamma: float = 0.95
    uphill_r: float = 0.01
    acquisition_mode: str = "product"
    exact_noise: bool = False

    def __post_init__(self):
        if not 0 <= self.c1 < self.c2 <= 1:
            raise ValueError("need 0 <= c1 < c2 <= 1")
        if not 0 < self.c_W <= 1:
            raise ValueError("need 0 < c_W <= 1")
        if self.alpha_ext < 1:
            raise ValueError("alpha_ext must be >= 1")
        if self.theta_reset <= 1:
            raise ValueError("theta_reset must be > 1")
        if self.budget_L < 1:
            raise ValueError("budget_L must be >= 1")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if self.acquisition_mode not in ACQUISITION_MODES:
            raise ValueError(f"acquisition_mode must be one of {ACQUISITION_MODES}")

    @property
    def kernel(self) -> WienerKernel:
        return WienerKernel(tau=self.tau)


@dataclass(frozen=True)
class SearchOutcome:
    alpha_accepted: float
    alpha_next: float
    alpha_stats: float
    x_new: np.ndarray
    batch_at_accept: BatchEvaluation
    evals_used: int
    termination: Termination
    # diagnostics
    t_accepted: float = 0.0
    positions: tuple[float, ...] = ()
    p_wolfe: float = float("nan")
    sigma_f: float = 0.0
    sigma_df: float = 0.0
    surrogate: SurrogateState | None = field(default=None, repr=False, compare=False)


def scale_factor(direction, grad0) -> float:
    """``|d . grad0|``, which makes the scaled initial slope exactly -1."""
    slope = float(np.dot(direction, grad0))
    if abs(slope) < 1e-30:
        raise VanishingGradient(f"projected gradient {slope!r} is numerically zero")
    if slope >= 0:
        raise NotADescentDirection(f"d . grad = {slope!r} >= 0")
    return abs(slope)


def scale_observation(y_raw, grad_raw, f0_raw, direction, alpha0, beta):
    y = (y_raw - f0_raw) / (alpha0 * beta)
    dy = float(np.dot(grad_raw, direction)) / beta
    return float(y), dy


def rescale_outcome(
    x0,
    f0,
    alpha0,
    direction,
    tt,
    batch: BatchEvaluation,
    beta,
    alpha_stats,
    config: SearchConfig,
    evals_used: int = 1,
    termination: Termination = "wolfe-accept",
    **diagnostics,
) -> SearchOutcome:
    """Map an accepted scaled step back to parameter space and propagate the step size."""
    if not tt > 0:
        raise ValueError("accepted step must be positive")
    alpha_acc = tt * alpha0
    x_new = np.asarray(x0) + alpha_acc * np.asarray(direction)
    alpha_stats = config.gamma * alpha_stats + (1.0 - config.gamma) * alpha_acc
    alpha_next = alpha_acc * config.alpha_ext
    if alpha_next < alpha_stats / config.theta_reset or alpha_next > alpha_stats * config.theta_reset:
        log.debug("step size %.3g outside trust band of %.3g; resetting", alpha_next, alpha_stats)
        alpha_next = alpha_stats
    return SearchOutcome(
        alpha_accepted=alpha_acc,
        alpha_next=alpha_next,
        alpha_stats=alpha_stats,
        x_new=x_new,
        batch_at_accept=batch,
        evals_used=evals_used,
        termination=termination,
        t_accepted=tt,
        **diagnostics,
    )


def _finite(batch: BatchEvaluation) -> bool:
    return math.isfinite(batch.loss) and bool(np.all(np.isfinite(batch.grad)))


def _avoid_collision(tt: float, T: np.ndarray) -> float:
    hit = np.abs(T - tt) <= DUPLICATE_TOL
    if not np.any(hit):
        return tt
    ts = np.sort(T)
    i = int(np.searchsorted(ts, tt))
    width = ts[i + 1] - ts[i] if i + 1 < ts.size else 1.0
    return tt + 1e-6 * width


def probabilistic_line_search(
    objective: Objective,
    x0,
    direction,
    batch0: BatchEvaluation,
    alpha0: float,
    alpha_stats: float,
    config: SearchConfig = SearchConfig(),
) -> SearchOutcome:
    """Run one line search from ``x0`` along ``direction``.

    ``objective(x)`` must return a fresh :class:`BatchEvaluation`; ``batch0``
    holds the statistics at ``x0`` (typically the accepted evaluation of the
    previous search).
    """
    x0 = np.asarray(x0, dtype=float)
    d = np.asarray(direction, dtype=float)
    c1, c2, c_W = config.c1, config.c2, config.c_W
    f0 = batch0.loss

    beta = scale_factor(d, batch0.grad)
    if config.exact_noise and batch0.sample_grads is not None:
        proj_var = exact_projected_variance(batch0.sample_grads, d)
    else:
        proj_var = project_variance(batch0.var_grad, d)
    sigma_f, sigma_df = clamp_and_scale_noise(batch0.var_loss, proj_var, alpha0, beta)
    state = init_surrogate(sigma_f, sigma_df, config.kernel)

    evals = 0
    positions: list[float] = []

    def evaluate(tt):
        nonlocal evals
        batch = objective(x0 + tt * alpha0 * d)
        evals += 1
        positions.append(float(tt))
        return batch

    def scaled(batch):
        return scale_observation(batch.loss, batch.grad, f0, d, alpha0, beta)

    def finish(tt, batch, termination, p):
        return rescale_outcome(
            x0, f0, alpha0, d, tt, batch, beta, alpha_stats, config,
            evals_used=evals,
            termination=termination,
            positions=tuple(positions),
            p_wolfe=p,
            sigma_f=sigma_f,
            sigma_df=sigma_df,
            surrogate=state,
        )

    def checked(batch):
        if not _finite(batch):
            raise NonFiniteObjective(f"objective returned loss {batch.loss!r} or a non-finite gradient")
        return batch

    # first evaluation; back off on overflow
    tt = 1.0
    batch = evaluate(tt)
    retries = 0
    while not _finite(batch):
        if retries == MAX_NONFINITE_RETRIES:
            raise NonFiniteObjective("objective non-finite at every trial step")
        retries += 1
        tt /= 2.0
        positions.pop()
        batch = evaluate(tt)

    t_ext = 1.0
    for it in range(config.budget_L):
        if it > 0:
            tt = _avoid_collision(tt, state.T)
            batch = checked(evaluate(tt))
        state = state.add_observation(tt, *scaled(batch))

        p = prob_wolfe(state, tt, c1, c2).p_wolfe
        if p > c_W:
            return finish(tt, batch, "wolfe-accept", p)

        # sweep the cells: collect cubic minima, check for an uphill start
        # and for earlier nodes that have become acceptable
        ts = np.sort(state.T)
        interior: list[float] = []
        acceptable: list[float] = []
        for n in range(state.N - 1):
            lo, hi = ts[n], ts[n + 1]
            t_min = state.cubic_minimum(lo + CELL_OFFSET * (hi - lo))
            if t_min is not None and lo < t_min < hi:
                if math.isfinite(t_min) and t_min > 0:
                    interior.append(t_min)
            elif n == 0 and state.d1mean(0.0) > 0:
                tt = config.uphill_r * (lo + hi)
                batch = checked(evaluate(tt))
                return finish(tt, batch, "uphill-retreat", float("nan"))
            if n > 0 and prob_wolfe(state, lo, c1, c2).p_wolfe > c_W:
                acceptable.append(float(lo))

        if acceptable:
            if tt in acceptable:
                return finish(tt, batch, "wolfe-accept", prob_wolfe(state, tt, c1, c2).p_wolfe)
            best = min(acceptable, key=state.mean)
            p_best = prob_wolfe(state, best, c1, c2).p_wolfe
            tt = best
            batch = checked(evaluate(tt))
            return finish(tt, batch, "wolfe-accept", p_best)

        cands = generate_candidates(state, t_ext, c1, c2, interior=interior)
        idx, extrapolated = choose_candidate(cands, config.acquisition_mode)
        if extrapolated:
            t_ext *= 2.0
        tt = cands[idx].t

    # budget exhausted: one last evaluation, then fall back to the lowest mean
    tt = _avoid_collision(tt, state.T)
    batch = checked(evaluate(tt))
    state = state.add_observation(tt, *scaled(batch))
    p = prob_wolfe(state, tt, c1, c2).p_wolfe
    if p > c_W:
        return finish(tt, batch, "wolfe-accept", p)

    means = [state.mean(t) for t in state.T]
    t_low = float(state.T[int(np.argmin(means))])
    if t_low == 0.0:
        # never step back to the start; take the lowest-mean node with t > 0
        pos = [(mu, t) for mu, t in zip(means, state.T) if t > 0]
        t_low = float(min(pos)[1])
    p_low = prob_wolfe(state, t_low, c1, c2).p_wolfe
    if t_low == tt:
        return finish(tt, batch, "budget-lowest-mean", p_low)
    tt = t_low
    batch = checked(evaluate(tt))
    return finish(tt, batch, "budget-lowest-mean", p_low)
