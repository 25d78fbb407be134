"""Finite-sum test problems with per-sample losses and gradients."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import expit

from .noise import BatchEvaluation, BatchTooSmall, DimensionMismatch, batch_statistics

# (x, idx) -> (losses (m,), grads (m, D))
PerSample = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


class InvalidSpectrum(ValueError):
    pass


@dataclass
class FiniteSumProblem:
    """Objective of the form ``(1/M) sum_i loss(x, d_i)``.

    ``evaluations`` counts calls to :meth:`evaluate_batch`; full-batch
    helpers used for reporting do not touch the counter.
    """

    dim: int
    size: int
    per_sample: PerSample = field(repr=False)
    name: str = "problem"
    finite_population: bool = False
    keep_samples: bool = False
    evaluations: int = 0

    def evaluate_batch(self, x, m: int, rng: np.random.Generator) -> BatchEvaluation:
        x = self._check_x(x)
        if m < 2:
            raise BatchTooSmall("batch size must be at least 2")
        if m > self.size:
            raise ValueError(f"batch size {m} exceeds dataset size {self.size}")
        idx = rng.integers(0, self.size, size=m)
        losses, grads = self.per_sample(x, idx)
        self.evaluations += 1
        return batch_statistics(
            losses,
            grads,
            population_size=self.size if self.finite_population else None,
            keep_samples=self.keep_samples,
        )

    def evaluate_indices(self, x, idx) -> BatchEvaluation:
        """Batch statistics on explicit indices (counts as one evaluation)."""
        x = self._check_x(x)
        losses, grads = self.per_sample(x, np.asarray(idx))
        self.evaluations += 1
        return batch_statistics(losses, grads, keep_samples=self.keep_samples)

    def full_loss(self, x) -> float:
        return float(self._full(x)[0].mean())

    def full_grad(self, x) -> np.ndarray:
        return self._full(x)[1].mean(axis=0)

    def _full(self, x):
        return self.per_sample(self._check_x(x), np.arange(self.size))

    def _check_x(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionMismatch(f"expected parameter vector of shape ({self.dim},), got {x.shape}")
        return x


def make_noisy_quadratic(D: int, condition_spectrum, noise_scale: float, M: int, seed: int) -> FiniteSumProblem:
    """``(1/M) sum_i 0.5 (x - e_i)^T H (x - e_i)`` with diagonal H and Gaussian offsets e_i."""
    if D < 1 or M < 2:
        raise ValueError("need D >= 1 and M >= 2")
    h = np.broadcast_to(np.asarray(condition_spectrum, dtype=float), (D,)).copy()
    if np.any(h <= 0):
        raise InvalidSpectrum("Hessian eigenvalues must be positive")
    eps = np.random.default_rng(seed).normal(0.0, noise_scale, size=(M, D))

    def per_sample(x, idx):
        r = x[None, :] - eps[idx]
        return 0.5 * np.sum(h * r * r, axis=1), h * r

    prob = FiniteSumProblem(D, M, per_sample, name="quadratic")
    prob.hessian_diag = h
    prob.offsets = eps
    return prob


def make_logistic_regression(features, labels, l2: float = 0.0) -> FiniteSumProblem:
    """Logistic loss ``log(1 + exp(-y w.x)) + (l2/2) |w|^2 / M`` per sample."""
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise DimensionMismatch(f"features {X.shape} and labels {y.shape} disagree")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    M, D = X.shape
    if M < 2:
        raise ValueError("need at least two samples")
    if l2 < 0:
        raise ValueError("l2 must be non-negative")
    reg = l2 / M

    def per_sample(w, idx):
        Xi, yi = X[idx], y[idx]
        margin = yi * (Xi @ w)
        losses = np.logaddexp(0.0, -margin) + 0.5 * reg * (w @ w)
        coef = -yi * expit(-margin)
        grads = coef[:, None] * Xi + reg * w[None, :]
        return losses, grads

    return FiniteSumProblem(D, M, per_sample, name="logistic")


def make_synthetic_blobs(D: int, M: int, class_separation: float, seed: int):
    """Two unit-variance Gaussian clusters at ``+-(separation/2) u``, labels +-1."""
    if D < 1 or M < 2 or M % 2:
        raise ValueError("need D >= 1 and an even M >= 2")
    rng = np.random.default_rng(seed)
    u = rng.normal(size=D)
    u /= np.linalg.norm(u)
    half = M // 2
    labels = np.concatenate([np.ones(half), -np.ones(half)])
    centers = labels[:, None] * (0.5 * class_separation) * u[None, :]
    features = centers + rng.normal(size=(M, D))
    return features, labels


_ACTIVATIONS = {
    "sigmoid": (expit, lambda a: a * (1.0 - a)),
    "tanh": (np.tanh, lambda a: 1.0 - a * a),
}


def make_small_mlp(
    layer_sizes: Sequence[int],
    activation: str,
    loss: str,
    data,
    seed: int | None = None,
) -> FiniteSumProblem:
    """Fully connected net with per-sample gradients over all weights and biases.

    ``layer_sizes`` lists input, hidden and output widths. Hidden layers use
    ``activation``; the output is linear for ``squared`` loss and a sigmoid
    (single unit, labels in {0, 1}) or softmax (integer labels) for
    ``cross-entropy``. Parameters are flattened layer by layer as (W, b) with
    W of shape (n_out, n_in). ``seed`` only affects :attr:`initial_params`.
    """
    sizes = list(layer_sizes)
    if len(sizes) < 2:
        raise ValueError("need at least input and output widths")
    if activation not in _ACTIVATIONS:
        raise ValueError(f"activation must be one of {sorted(_ACTIVATIONS)}")
    if loss not in ("cross-entropy", "squared"):
        raise ValueError("loss must be 'cross-entropy' or 'squared'")
    X, T = data
    X = np.asarray(X, dtype=float)
    T = np.asarray(T)
    if X.ndim != 2 or X.shape[1] != sizes[0] or T.shape[0] != X.shape[0]:
        raise DimensionMismatch("data does not match the input layer")
    n_out = sizes[-1]
    if loss == "squared":
        T = T.astype(float).reshape(X.shape[0], -1)
        if T.shape[1] != n_out:
            raise DimensionMismatch("targets do not match the output layer")
    elif n_out == 1:
        T = T.astype(float).reshape(-1, 1)
    else:
        T = T.astype(int)
        if T.ndim != 1 or T.min() < 0 or T.max() >= n_out:
            raise DimensionMismatch("class labels out of range for the output layer")

    shapes = [(o, i) for i, o in zip(sizes[:-1], sizes[1:])]
    counts = [o * i + o for o, i in shapes]
    offsets = np.concatenate([[0], np.cumsum(counts)])
    D = int(offsets[-1])
    act, dact = _ACTIVATIONS[activation]

    def unpack(x):
        out = []
        for (o, i), start in zip(shapes, offsets[:-1]):
            W = x[start : start + o * i].reshape(o, i)
            b = x[start + o * i : start + o * i + o]
            out.append((W, b))
        return out

    def per_sample(x, idx):
        params = unpack(x)
        a = X[idx]
        acts = [a]
        for W, b in params[:-1]:
            a = act(a @ W.T + b)
            acts.append(a)
        W, b = params[-1]
        z = a @ W.T + b
        t = T[idx]
        if loss == "squared":
            r = z - t
            losses = 0.5 * np.sum(r * r, axis=1)
            delta = r
        elif n_out == 1:
            zz = z[:, 0]
            losses = np.logaddexp(0.0, zz) - t[:, 0] * zz
            delta = (expit(zz) - t[:, 0])[:, None]
        else:
            zmax = z.max(axis=1, keepdims=True)
            lse = zmax[:, 0] + np.log(np.exp(z - zmax).sum(axis=1))
            losses = lse - z[np.arange(len(t)), t]
            delta = np.exp(z - lse[:, None])
            delta[np.arange(len(t)), t] -= 1.0
        grads = []
        for layer in range(len(params) - 1, -1, -1):
            W, _ = params[layer]
            a_in = acts[layer]
            grads.append((np.einsum("mo,mi->moi", delta, a_in).reshape(len(idx), -1), delta))
            if layer:
                delta = (delta @ W) * dact(a_in)
        flat = [np.concatenate([gW, gb], axis=1) for gW, gb in reversed(grads)]
        return losses, np.concatenate(flat, axis=1)

    prob = FiniteSumProblem(D, X.shape[0], per_sample, name="mlp")
    rng = np.random.default_rng(seed)
    init = []
    for o, i in shapes:
        init.append(rng.normal(0.0, 1.0 / np.sqrt(i), size=o * i))
        init.append(np.zeros(o))
    prob.initial_params = np.concatenate(init)
    prob.unpack = unpack
    return prob


def load_csv_dataset(path, header: bool = False):
    """Dense CSV with the label in the last column; {0, 1} labels map to {-1, +1}."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if header:
        rows = rows[1:]
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    try:
        data = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from None
    if data.ndim != 2 or data.shape[1] < 2:
        raise ValueError(f"{path}: need at least one feature column and a label column")
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{path}: non-finite entries")
    features, labels = data[:, :-1], data[:, -1]
    values = set(np.unique(labels))
    if values <= {0.0, 1.0}:
        labels = 2.0 * labels - 1.0
    elif not values <= {-1.0, 1.0}:
        raise ValueError(f"{path}: labels must be in {{-1, 1}} or {{0, 1}}")
    return features, labels
