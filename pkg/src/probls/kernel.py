"""Once-integrated Wiener process covariance and its derivative variants.

All functions broadcast over numpy arrays. The naming follows the usual
convention for derivative kernels: a leading ``d`` differentiates in the
first argument, a trailing ``d`` in the second. ``kd(a, b)`` is therefore
cov(f(a), f'(b)) and ``dk(a, b)`` is cov(f'(a), f(b)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TAU = 10.0


@dataclass(frozen=True)
class WienerKernel:
    """Integrated Wiener kernel with input offset ``tau`` and output scale ``theta``.

    The line search always runs with ``theta = 1`` and absorbs the scale
    into its input normalisation; ``theta`` is kept free for testing.
    """

    tau: float = DEFAULT_TAU
    theta: float = 1.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")

    @property
    def _scale(self) -> float:
        return self.theta**2

    def k(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        mn = np.minimum(a + self.tau, b + self.tau)
        return self._scale * (mn**3 / 3.0 + 0.5 * np.abs(a - b) * mn**2)

    def kd(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        at, bt = a + self.tau, b + self.tau
        out = np.where(a < b, 0.5 * at**2, at * bt - 0.5 * bt**2)
        return self._scale * out

    def dk(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        at, bt = a + self.tau, b + self.tau
        out = np.where(a > b, 0.5 * bt**2, at * bt - 0.5 * at**2)
        return self._scale * out

    def dkd(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return self._scale * np.minimum(a + self.tau, b + self.tau)

    def ddk(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return self._scale * np.where(a <= b, b - a, 0.0)

    def ddkd(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return self._scale * np.where(a <= b, 1.0, 0.0)

    def dddk(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return self._scale * np.where(a <= b, -1.0, 0.0)

    def gram(self, t) -> np.ndarray:
        """Joint prior covariance of ``[f(t); f'(t)]``, shape (2N, 2N)."""
        t = np.asarray(t, dtype=float)
        a, b = t[:, None], t[None, :]
        kd = self.kd(a, b)
        return np.block([[self.k(a, b), kd], [kd.T, self.dkd(a, b)]])


DEFAULT_KERNEL = WienerKernel()
