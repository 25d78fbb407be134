"""Mini-batch estimates of loss/gradient noise and their projection onto a direction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class BatchTooSmall(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class BatchEvaluation:
    """Loss, gradient and the variances of both as estimated from one mini-batch.

    ``var_loss`` and ``var_grad`` are variances of the batch *means*, not of
    single samples. ``sample_grads`` is only kept when requested, for the
    exact projected-variance estimator.
    """

    loss: float
    grad: np.ndarray
    var_loss: float
    var_grad: np.ndarray
    batch_size: int
    sample_grads: np.ndarray | None = field(default=None, repr=False, compare=False)


def batch_statistics(
    losses,
    grads,
    population_size: int | None = None,
    keep_samples: bool = False,
) -> BatchEvaluation:
    """Mean loss and gradient of a batch plus the variance of those means.

    With ``population_size`` (M) given, the 1/m factor of the variance of the
    mean is replaced by the finite-population factor (M - m) / (m M).
    """
    losses = np.asarray(losses, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if grads.ndim != 2 or losses.ndim != 1 or grads.shape[0] != losses.shape[0]:
        raise DimensionMismatch(
            f"expected losses (m,) and grads (m, D), got {losses.shape} and {grads.shape}"
        )
    m = losses.shape[0]
    if m < 2:
        raise BatchTooSmall("noise estimation needs a batch of at least 2 samples")

    loss = losses.mean()
    grad = grads.mean(axis=0)
    var_loss = ((losses**2).mean() - loss**2) / (m - 1)
    var_grad = ((grads**2).mean(axis=0) - grad**2) / (m - 1)
    var_loss = max(0.0, float(var_loss))
    var_grad = np.maximum(var_grad, 0.0)
    if population_size is not None:
        factor = (population_size - m) / population_size
        var_loss *= factor
        var_grad = var_grad * factor
    return BatchEvaluation(
        loss=float(loss),
        grad=grad,
        var_loss=var_loss,
        var_grad=var_grad,
        batch_size=m,
        sample_grads=grads if keep_samples else None,
    )


def project_variance(var_grad, direction) -> float:
    """Variance of the projected gradient under independent coordinates."""
    var_grad = np.asarray(var_grad, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if var_grad.shape != direction.shape:
        raise DimensionMismatch(f"{var_grad.shape} vs {direction.shape}")
    return float(np.dot(direction**2, var_grad))


def exact_projected_variance(sample_grads, direction) -> float:
    """Variance of the batch-mean gradient projected onto ``direction``, using the full sample covariance."""
    sample_grads = np.asarray(sample_grads, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if sample_grads.ndim != 2 or sample_grads.shape[1] != direction.shape[0]:
        raise DimensionMismatch(f"{sample_grads.shape} vs {direction.shape}")
    m = sample_grads.shape[0]
    if m < 2:
        raise BatchTooSmall("noise estimation needs a batch of at least 2 samples")
    proj = sample_grads @ direction
    val = ((proj**2).mean() - proj.mean() ** 2) / (m - 1)
    return max(0.0, float(val))


def clamp_and_scale_noise(var_loss: float, projected_var: float, alpha0: float, beta: float):
    """Noise standard deviations in the line search's scaled coordinates."""
    sigma_f = np.sqrt(max(0.0, var_loss)) / (alpha0 * beta)
    sigma_df = np.sqrt(max(0.0, projected_var)) / beta
    return float(sigma_f), float(sigma_df)
