import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import hermite_cubic
from probls.classic import DegenerateInterval, classic_cubic_interpolant, classic_wolfe_check
from probls.surrogate import SurrogateState


def test_wolfe_examples():
    assert classic_wolfe_check(0.5, -1.0, 0.0, 0.0, 1.0, 0.05, 0.5, strong=False)
    assert classic_wolfe_check(0.5, -1.0, 0.0, 0.0, 1.0, 0.05, 0.5, strong=True)
    assert not classic_wolfe_check(0.5, -1.0, 0.0, -0.9, 1.0, 0.05, 0.5)
    assert classic_wolfe_check(0.5, -1.0, 0.5, 0.0, 1.0, 0.0, 0.5)
    with pytest.raises(ValueError):
        classic_wolfe_check(0.0, -1.0, 0.0, 0.0, 0.0)


f = st.floats(-10, 10)


@given(f, st.floats(-10, -1e-3), f, f, st.floats(1e-3, 10))
def test_strong_implies_weak(f0, df0, ft, dft, t):
    if classic_wolfe_check(f0, df0, ft, dft, t, strong=True):
        assert classic_wolfe_check(f0, df0, ft, dft, t, strong=False)


def test_interpolant_examples():
    assert classic_cubic_interpolant(0, 0, -1, 1, 0, 1, 0.5) == pytest.approx(-0.25)
    assert classic_cubic_interpolant(0.3, 1.7, 2, 1.1, -4, 0, 0.3) == pytest.approx(1.7)
    with pytest.raises(DegenerateInterval):
        classic_cubic_interpolant(1.0, 0, 0, 1.0, 0, 0, 1.0)


def test_interpolant_matches_direct_solve_and_surrogate():
    rng = np.random.default_rng(2)
    for _ in range(50):
        tb = float(rng.uniform(0.1, 5))
        fb, db = rng.normal(size=2)
        s = SurrogateState(np.array([0.0, tb]), np.array([0.0, fb]), np.array([-1.0, db]), 0.0, 0.0)
        for t in np.linspace(0, tb, 9):
            v = classic_cubic_interpolant(0.0, 0.0, -1.0, tb, fb, db, t)
            assert v == pytest.approx(hermite_cubic(0.0, 0.0, -1.0, tb, fb, db, t), abs=1e-10)
            assert v == pytest.approx(s.mean(t), abs=1e-8)
