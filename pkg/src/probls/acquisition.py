"""Candidate generation and selection for the next line-search evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .bvn import gauss_cdf, gauss_pdf
from .surrogate import SurrogateState
from .wolfe import prob_wolfe

CELL_OFFSET = 1e-6
MIN_NODE_DISTANCE = 1e-10

ACQUISITION_MODES = ("product", "ei-only", "pwolfe-only")


@dataclass(frozen=True)
class Candidate:
    t: float
    mean: float
    std: float
    ei: float
    p_wolfe: float
    kind: Literal["interpolation", "extrapolation"]


def expected_improvement(mean: float, std: float, eta: float) -> float:
    """Expected amount by which an observation with the given marginal undercuts ``eta``."""
    if std < 0:
        raise ValueError("std must be non-negative")
    gap = eta - mean
    if std == 0:
        return max(0.0, gap)
    z = gap / std
    return float(max(0.0, gap * gauss_cdf(z) + std * gauss_pdf(z)))


def cell_minima(state: SurrogateState) -> list[float]:
    """Local minimisers of the posterior mean that lie strictly inside a cell."""
    ts = np.sort(state.T)
    out = []
    for lo, hi in zip(ts[:-1], ts[1:]):
        t_min = state.cubic_minimum(lo + CELL_OFFSET * (hi - lo))
        if t_min is None or not math.isfinite(t_min):
            continue
        if lo < t_min < hi and t_min > 0:
            out.append(t_min)
    return out


def _make_candidate(state, t, kind, eta, c1, c2) -> Candidate:
    mean = state.mean(t)
    std = math.sqrt(state.var_f(t))
    return Candidate(
        t=t,
        mean=mean,
        std=std,
        ei=expected_improvement(mean, std, eta),
        p_wolfe=prob_wolfe(state, t, c1, c2).p_wolfe,
        kind=kind,
    )


def current_best(state: SurrogateState) -> float:
    """Lowest posterior mean over the observed positions."""
    return min(state.mean(t) for t in state.T)


def generate_candidates(
    state: SurrogateState,
    t_ext: float,
    c1: float = 0.05,
    c2: float = 0.5,
    interior: list[float] | None = None,
) -> list[Candidate]:
    """Cell-wise cubic minima followed by one extrapolation node at ``max(T) + t_ext``.

    ``interior`` may pass precomputed cell minima (as the line search does
    during its cell sweep); otherwise they are computed here.
    """
    if state.N < 2:
        raise ValueError("need at least two observations to form a cell")
    eta = current_best(state)
    if interior is None:
        interior = cell_minima(state)
    cands = [
        _make_candidate(state, t, "interpolation", eta, c1, c2)
        for t in interior
        if np.min(np.abs(state.T - t)) >= MIN_NODE_DISTANCE
    ]
    t_far = float(np.max(state.T)) + t_ext
    cands.append(_make_candidate(state, t_far, "extrapolation", eta, c1, c2))
    return cands


def acquisition_score(c: Candidate, mode: str = "product") -> float:
    if mode == "product":
        return c.ei * c.p_wolfe
    if mode == "ei-only":
        return c.ei
    if mode == "pwolfe-only":
        return c.p_wolfe
    raise ValueError(f"unknown acquisition mode {mode!r}")


def choose_candidate(candidates: list[Candidate], mode: str = "product") -> tuple[int, bool]:
    """Index of the best candidate (first one on ties) and whether it extrapolates."""
    if not candidates:
        raise ValueError("empty candidate list")
    scores = [acquisition_score(c, mode) for c in candidates]
    best = int(np.argmax(scores))  # argmax returns the first maximum
    return best, candidates[best].kind == "extrapolation"
