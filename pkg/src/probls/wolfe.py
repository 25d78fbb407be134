"""Probabilistic Wolfe conditions on the GP surrogate."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bvn import bvn_rectangle
from .surrogate import SurrogateState

DETERMINISTIC_VAR = 1e-9


@dataclass(frozen=True)
class WolfeAssessment:
    p_wolfe: float
    m_a: float
    m_b: float
    C_aa: float
    C_bb: float
    C_ab: float
    rho: float
    deterministic: bool


def wolfe_moments(state: SurrogateState, t: float, c1: float, c2: float):
    """Mean and covariance of the Armijo variable ``a_t`` and curvature variable ``b_t``.

    a_t = f(0) - f(t) + c1 t f'(0),  b_t = f'(t) - c2 f'(0).
    Returns ``(m_a, m_b, C_aa, C_bb, C_ab)``.
    """
    m0 = state.mean(0.0)
    dm0 = state.d1mean(0.0)
    V0 = state.var_f(0.0)
    Vd0 = state.cov_f_df(0.0)
    dVd0 = state.var_df(0.0)
    V0f, Vd0f, V0df, Vd0df = state.cov_with_origin(t)
    Vt = state.var_f(t)
    Vdt = state.cov_f_df(t)
    dVdt = state.var_df(t)

    c1t = c1 * t
    m_a = m0 - state.mean(t) + c1t * dm0
    m_b = state.d1mean(t) - c2 * dm0
    C_aa = V0 + c1t**2 * dVd0 + Vt + 2.0 * (c1t * (Vd0 - Vd0f) - V0f)
    C_bb = c2**2 * dVd0 - 2.0 * c2 * Vd0df + dVdt
    C_ab = -c2 * (Vd0 + c1t * dVd0) + c2 * Vd0f + V0df + c1t * Vd0df - Vdt
    return m_a, m_b, C_aa, C_bb, C_ab


def prob_wolfe(state: SurrogateState, t: float, c1: float = 0.05, c2: float = 0.5) -> WolfeAssessment:
    """Probability that the weak Wolfe conditions hold at ``t``.

    The curvature variable is additionally bounded above, approximating the
    strong condition |f'(t)| <= c2 |f'(0)| at roughly 95% confidence.
    Near-zero variances fall back to the deterministic indicator of the
    weak conditions.
    """
    m_a, m_b, C_aa, C_bb, C_ab = wolfe_moments(state, t, c1, c2)

    if C_aa <= DETERMINISTIC_VAR and C_bb <= DETERMINISTIC_VAR:
        p = float(m_a >= 0 and m_b >= 0)
        return WolfeAssessment(p, m_a, m_b, C_aa, C_bb, C_ab, 0.0, True)

    if C_aa <= 0 or C_bb <= 0:
        return WolfeAssessment(0.0, m_a, m_b, C_aa, C_bb, C_ab, 0.0, False)

    sa, sb = math.sqrt(C_aa), math.sqrt(C_bb)
    rho = max(-1.0, min(1.0, C_ab / (sa * sb)))
    dm0 = state.d1mean(0.0)
    dVd0 = state.var_df(0.0)
    low_a = -m_a / sa
    low_b = -m_b / sb
    up_b = (2.0 * c2 * (abs(dm0) + 2.0 * math.sqrt(dVd0)) - m_b) / sb
    if up_b <= low_b:
        p = 0.0
    else:
        p = bvn_rectangle(low_a, math.inf, low_b, up_b, rho)
    return WolfeAssessment(p, m_a, m_b, C_aa, C_bb, C_ab, rho, False)


def is_acceptable(assessment: WolfeAssessment, c_W: float = 0.3) -> bool:
    return assessment.p_wolfe > c_W
