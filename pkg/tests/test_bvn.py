import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bvn_quadrature
from probls.bvn import InvalidCorrelation, InvalidLimits, bvn_rectangle, gauss_cdf, gauss_pdf

INF = math.inf


@pytest.mark.parametrize(
    "rho, expected",
    [(0.0, 0.25), (0.5, 1.0 / 3.0), (1.0, 0.5), (-1.0, 0.0), (-0.5, 1.0 / 6.0)],
)
def test_orthant_values(rho, expected):
    # quadrant formula 1/4 + asin(rho) / (2 pi)
    assert expected == pytest.approx(0.25 + math.asin(rho) / (2 * math.pi), abs=1e-15)
    assert bvn_rectangle(0, INF, 0, INF, rho) == pytest.approx(expected, abs=1e-9)


def test_total_probability():
    assert bvn_rectangle(-INF, INF, -INF, INF, 0.7) == pytest.approx(1.0, abs=1e-15)


def test_gauss_helpers():
    assert gauss_cdf(0.0) == 0.5
    assert gauss_pdf(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))
    z = np.linspace(-6, 6, 25)
    np.testing.assert_allclose(gauss_cdf(z) + gauss_cdf(-z), 1.0, atol=1e-15)


def test_errors():
    with pytest.raises(InvalidCorrelation):
        bvn_rectangle(0, 1, 0, 1, 1.01)
    with pytest.raises(InvalidLimits):
        bvn_rectangle(1, 0, 0, 1, 0.0)
    with pytest.raises(InvalidLimits):
        bvn_rectangle(0, 1, 2, 1, 0.0)


def test_degenerate_rho_matches_univariate():
    # rho = 1: A = B, so the rectangle is the overlap of both intervals
    assert bvn_rectangle(-1, 2, 0, 3, 1.0) == pytest.approx(gauss_cdf(2) - gauss_cdf(0))
    # rho = -1: B = -A
    assert bvn_rectangle(-1, 2, 0, 3, -1.0) == pytest.approx(gauss_cdf(0) - gauss_cdf(-1))


limit = st.floats(min_value=-5, max_value=5)
corr = st.floats(min_value=-0.999, max_value=0.999)


@settings(max_examples=200, deadline=None)
@given(limit, limit, limit, limit, limit, corr)
def test_additivity(a, b, c, d, e, rho):
    xl, xm, xu = sorted((a, b, c))
    yl, yu = sorted((d, e))
    whole = bvn_rectangle(xl, xu, yl, yu, rho)
    parts = bvn_rectangle(xl, xm, yl, yu, rho) + bvn_rectangle(xm, xu, yl, yu, rho)
    assert parts == pytest.approx(whole, abs=1e-7)


@settings(max_examples=200, deadline=None)
@given(limit, limit, st.floats(min_value=-1, max_value=1))
def test_marginalization(a, b, rho):
    xl, xu = sorted((a, b))
    p = bvn_rectangle(xl, xu, -INF, INF, rho)
    assert p == pytest.approx(float(gauss_cdf(xu) - gauss_cdf(xl)), abs=1e-8)


@settings(max_examples=200, deadline=None)
@given(limit, limit, limit, limit, st.floats(min_value=-1, max_value=1))
def test_symmetry_and_range(a, b, c, d, rho):
    xl, xu = sorted((a, b))
    yl, yu = sorted((c, d))
    p = bvn_rectangle(xl, xu, yl, yu, rho)
    assert 0.0 <= p <= 1.0
    assert p == pytest.approx(bvn_rectangle(yl, yu, xl, xu, rho), abs=1e-12)


def test_quadrature_oracle_on_random_grid():
    rng = np.random.default_rng(1234)
    worst = 0.0
    for i in range(200):
        rho = rng.choice([0.95, 0.99, 0.999, -0.95, -0.99, -0.999]) if i % 4 == 0 else rng.uniform(-0.999, 0.999)
        xl, xu = np.sort(rng.normal(0, 2, 2))
        yl, yu = np.sort(rng.normal(0, 2, 2))
        if rng.random() < 0.25:
            xu = INF
        if rng.random() < 0.25:
            yl = -INF
        got = bvn_rectangle(xl, xu, yl, yu, rho)
        want = bvn_quadrature(xl, xu, yl, yu, rho)
        worst = max(worst, abs(got - want))
    assert worst < 1e-6
