"""GP surrogate over the scaled one-dimensional line-search objective.

The state stores function values and projected gradients at scaled positions
``T`` and exposes the posterior mean (a piecewise cubic), its derivatives,
and the posterior (co)variances needed by the Wolfe test.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .kernel import DEFAULT_KERNEL, WienerKernel

DUPLICATE_TOL = 1e-12
VARIANCE_CLAMP_TOL = 1e-10


class DuplicatePosition(ValueError):
    pass


class NumericalError(ArithmeticError):
    """Posterior variance came out clearly negative."""


def _clamp_variance(v: float, prior: float) -> float:
    if v >= 0.0:
        return v
    # rounding in the subtraction scales with the prior variance
    if v > -VARIANCE_CLAMP_TOL * max(1.0, prior):
        return 0.0
    raise NumericalError(f"negative posterior variance {v:.3e}")


class _GramSolver:
    """Factorisation of the Gram-plus-noise matrix, used for all solves."""

    def __init__(self, G: np.ndarray, noise_free: bool):
        self._chol = None
        self._G = G
        try:
            self._chol = scipy.linalg.cho_factor(G, lower=True, check_finite=True)
            return
        except scipy.linalg.LinAlgError:
            pass
        if noise_free:
            jitter = 1e-10 * np.trace(G) / G.shape[0]
            G = G + jitter * np.eye(G.shape[0])
            self._G = G
            try:
                self._chol = scipy.linalg.cho_factor(G, lower=True)
                return
            except scipy.linalg.LinAlgError:
                pass
        # symmetric-indefinite fallback
        self._lu = scipy.linalg.lu_factor(G)

    @property
    def matrix(self) -> np.ndarray:
        return self._G

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self._chol is not None:
            return scipy.linalg.cho_solve(self._chol, rhs)
        return scipy.linalg.lu_solve(self._lu, rhs)


@dataclass(frozen=True)
class SurrogateState:
    T: np.ndarray
    Y: np.ndarray
    dY: np.ndarray
    sigma_f: float
    sigma_df: float
    kernel: WienerKernel = DEFAULT_KERNEL
    G: np.ndarray = field(init=False, repr=False)
    A: np.ndarray = field(init=False, repr=False)
    _solver: _GramSolver = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        T = np.asarray(self.T, dtype=float)
        Y = np.asarray(self.Y, dtype=float)
        dY = np.asarray(self.dY, dtype=float)
        if not (T.shape == Y.shape == dY.shape and T.ndim == 1 and T.size >= 1):
            raise ValueError("T, Y and dY must be 1-d arrays of equal, non-zero length")
        if self.sigma_f < 0 or self.sigma_df < 0:
            raise ValueError("noise levels must be non-negative")
        for arr in (T, Y, dY):
            if not np.all(np.isfinite(arr)):
                raise ValueError("non-finite observation passed to the surrogate")
            arr.setflags(write=False)
        n = T.size
        noise = np.concatenate([np.full(n, self.sigma_f**2), np.full(n, self.sigma_df**2)])
        G = self.kernel.gram(T) + np.diag(noise)
        solver = _GramSolver(G, noise_free=self.sigma_f == 0 and self.sigma_df == 0)
        A = solver.solve(np.concatenate([Y, dY]))
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "dY", dY)
        object.__setattr__(self, "G", solver.matrix)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "_solver", solver)

    @property
    def N(self) -> int:
        return self.T.size

    def add_observation(self, t: float, y: float, dy: float) -> "SurrogateState":
        """Return a new state refitted with one more (scaled) observation."""
        if not t > 0:
            raise ValueError(f"new observation position must be positive, got {t}")
        if np.any(np.abs(self.T - t) <= DUPLICATE_TOL):
            raise DuplicatePosition(f"position {t!r} already observed")
        return SurrogateState(
            np.append(self.T, t),
            np.append(self.Y, y),
            np.append(self.dY, dy),
            self.sigma_f,
            self.sigma_df,
            self.kernel,
        )

    # cross-covariance vectors between f(t) / f'(t) and the observations
    def _fvec(self, t: float) -> np.ndarray:
        return np.concatenate([self.kernel.k(t, self.T), self.kernel.kd(t, self.T)])

    def _dvec(self, t: float) -> np.ndarray:
        return np.concatenate([self.kernel.dk(t, self.T), self.kernel.dkd(t, self.T)])

    def mean(self, t: float) -> float:
        return float(self._fvec(t) @ self.A)

    def d1mean(self, t: float) -> float:
        return float(self._dvec(t) @ self.A)

    def d2mean(self, t: float) -> float:
        vec = np.concatenate([self.kernel.ddk(t, self.T), self.kernel.ddkd(t, self.T)])
        return float(vec @ self.A)

    def d3mean(self, t: float) -> float:
        return float(self.kernel.dddk(t, self.T) @ self.A[: self.N])

    def _post_cov(self, prior: float, u: np.ndarray, v: np.ndarray) -> float:
        return float(prior - u @ self._solver.solve(v))

    def var_f(self, t: float) -> float:
        u = self._fvec(t)
        prior = float(self.kernel.k(t, t))
        return _clamp_variance(self._post_cov(prior, u, u), prior)

    def var_df(self, t: float) -> float:
        u = self._dvec(t)
        prior = float(self.kernel.dkd(t, t))
        return _clamp_variance(self._post_cov(prior, u, u), prior)

    def cov_f_df(self, t: float) -> float:
        """Posterior covariance of f(t) and f'(t)."""
        return self._post_cov(float(self.kernel.kd(t, t)), self._fvec(t), self._dvec(t))

    def cov_with_origin(self, t: float) -> tuple[float, float, float, float]:
        """Posterior covariances ``(V0f, Vd0f, V0df, Vd0df)`` between (f(0), f'(0)) and (f(t), f'(t))."""
        kern = self.kernel
        f0, d0 = self._fvec(0.0), self._dvec(0.0)
        ft, dt = self._fvec(t), self._dvec(t)
        sol_ft = self._solver.solve(ft)
        sol_dt = self._solver.solve(dt)
        return (
            float(kern.k(0.0, t) - f0 @ sol_ft),
            float(kern.dk(0.0, t) - d0 @ sol_ft),
            float(kern.kd(0.0, t) - f0 @ sol_dt),
            float(kern.dkd(0.0, t) - d0 @ sol_dt),
        )

    def cubic_minimum(self, t: float) -> float | None:
        """Minimiser of the cubic mean piece containing ``t``, or None.

        ``t`` should sit just inside a cell so that the one-sided kernel
        derivatives pick the right piece. Returns None for complex roots or
        when the local model has no finite minimiser.
        """
        d1 = self.d1mean(t)
        d2 = self.d2mean(t)
        d3 = self.d3mean(t)
        if abs(d3) < 1e-9:
            # essentially quadratic; a non-convex parabola has no minimiser
            if d2 <= 0.0:
                return None
            out = -(d1 - t * d2) / d2
            return out if np.isfinite(out) else None
        a = 0.5 * d3
        b = d2 - t * d3
        c = d1 - d2 * t + 0.5 * d3 * t * t
        lam = b * b - 4.0 * a * c
        if lam < 0:
            return None
        sq = np.sign(a) * np.sqrt(lam)
        left = (-b - sq) / (2.0 * a)
        right = (-b + sq) / (2.0 * a)
        dl, dr = left - t, right - t
        cv_left = d1 * dl + 0.5 * d2 * dl**2 + d3 * dl**3 / 6.0
        cv_right = d1 * dr + 0.5 * d2 * dr**2 + d3 * dr**3 / 6.0
        return float(left if cv_left < cv_right else right)


def init_surrogate(sigma_f: float, sigma_df: float, kernel: WienerKernel = DEFAULT_KERNEL) -> SurrogateState:
    """Surrogate holding only the scaled origin observation (0, 0, -1)."""
    return SurrogateState(np.zeros(1), np.zeros(1), -np.ones(1), sigma_f, sigma_df, kernel)
