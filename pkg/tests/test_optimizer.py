import numpy as np
import pytest

from probls.linesearch import SearchConfig
from probls.optimizer import sgd_fixed_rate, sgd_with_line_search
from probls.problems import make_logistic_regression, make_noisy_quadratic, make_synthetic_blobs


def clean_quadratic(D=3, spectrum=1.0):
    return make_noisy_quadratic(D, spectrum, 0.0, 10, 0)


@pytest.mark.parametrize("alpha_init", [1e-4, 1e-2, 0.3, 1.0])
def test_noise_free_quadratic_converges(alpha_init):
    prob = clean_quadratic()
    x0 = np.ones(3)
    tr = sgd_with_line_search(prob, x0, alpha_init, eval_budget=20, batch_size=4)
    assert prob.full_loss(tr.x_final) < 1e-6 * prob.full_loss(x0)


def test_noise_free_loss_non_increasing():
    prob = clean_quadratic(4, [0.5, 1.0, 3.0, 7.0])
    tr = sgd_with_line_search(prob, np.ones(4), 0.05, eval_budget=60, batch_size=4)
    losses = [r.train_loss for r in tr.records]
    assert all(b <= a + 1e-15 for a, b in zip(losses, losses[1:]))


def test_budget_two_gives_one_search():
    prob = clean_quadratic(3, [1.0, 2.0, 3.0])
    tr = sgd_with_line_search(prob, np.ones(3), 1e-3, eval_budget=2, batch_size=4)
    assert len(tr.records) == 1
    with pytest.raises(ValueError):
        sgd_with_line_search(prob, np.ones(3), 1e-3, eval_budget=1)


def logistic(seed=0):
    X, y = make_synthetic_blobs(5, 300, 3.0, seed)
    return make_logistic_regression(X, y, 1.0)


def test_trace_accounting_and_band():
    prob = logistic()
    cfg = SearchConfig()
    tr = sgd_with_line_search(prob, np.zeros(5), 1e-3, eval_budget=200, config=cfg, seed=1, batch_size=16)
    cum = [r.cum_evals for r in tr.records]
    assert all(b > a for a, b in zip(cum, cum[1:]))
    # counter includes the initial evaluation
    assert prob.evaluations == cum[-1] == 1 + sum(tr.evals_per_search)
    assert cum[-1] <= 200 + cfg.budget_L + 1
    assert all(1 <= e <= cfg.budget_L + 2 for e in tr.evals_per_search)


def test_determinism():
    a = sgd_with_line_search(logistic(), np.zeros(5), 1e-3, 150, seed=7, batch_size=16)
    b = sgd_with_line_search(logistic(), np.zeros(5), 1e-3, 150, seed=7, batch_size=16)
    assert a.records == b.records
    np.testing.assert_array_equal(a.x_final, b.x_final)


def test_line_search_makes_progress_on_logistic():
    prob = logistic()
    x0 = np.zeros(5)
    tr = sgd_with_line_search(prob, x0, 1e-4, 300, seed=0, batch_size=32)
    assert prob.full_loss(tr.x_final) < 0.8 * prob.full_loss(x0)


def test_fixed_rate_examples():
    prob = make_noisy_quadratic(1, 1.0, 0.0, 4, 0)
    tr = sgd_fixed_rate(prob, np.array([3.0]), 1.0, eval_budget=1, batch_size=2)
    assert tr.x_final[0] == 0.0
    tr = sgd_fixed_rate(prob, np.array([1.0]), 2.5, eval_budget=30, batch_size=2)
    assert abs(tr.x_final[0]) > 1e4
    with pytest.raises(ValueError):
        sgd_fixed_rate(prob, np.array([1.0]), 0.0)
    assert len(tr.records) == tr.records[-1].cum_evals == 30
