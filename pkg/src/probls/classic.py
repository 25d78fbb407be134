"""Deterministic Wolfe test and cubic Hermite interpolation.

Used as the noise-free reference the probabilistic search must reduce to.
"""

from __future__ import annotations


class DegenerateInterval(ValueError):
    pass


def classic_wolfe_check(f0, df0, ft, dft, t, c1=0.05, c2=0.5, strong=False) -> bool:
    if not t > 0:
        raise ValueError("t must be positive")
    armijo = ft <= f0 + c1 * t * df0
    if strong:
        return bool(armijo and abs(dft) <= c2 * abs(df0))
    return bool(armijo and dft >= c2 * df0)


def classic_cubic_interpolant(t_a, f_a, df_a, t_b, f_b, df_b, t) -> float:
    """Cubic through (t_a, f_a, df_a) and (t_b, f_b, df_b), evaluated at ``t``."""
    h = t_b - t_a
    if h < 1e-14:
        raise DegenerateInterval(f"interval [{t_a}, {t_b}] is degenerate")
    s = (t - t_a) / h
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    return float(h00 * f_a + h10 * h * df_a + h01 * f_b + h11 * h * df_b)
