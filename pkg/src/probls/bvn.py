"""Standard bivariate normal rectangle probabilities.

The core routine is Genz's double-precision variant of the
Drezner & Wesolowsky (1990) Gauss-Legendre scheme for upper orthant
probabilities; rectangles are assembled by inclusion-exclusion.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erf, ndtr

_SQRT2 = math.sqrt(2.0)
_TWOPI = 2.0 * math.pi

# Gauss-Legendre half-rules (nodes on (0, 1], weights) for 6, 12 and 20 points.
_GL = {
    6: (
        np.array([0.9324695142031522, 0.6612093864662647, 0.2386191860831970]),
        np.array([0.1713244923791705, 0.3607615730481384, 0.4679139345726904]),
    ),
    12: (
        np.array([
            0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
            0.5873179542866171, 0.3678314989981802, 0.1252334085114692,
        ]),
        np.array([
            0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
            0.2031674267230659, 0.2334925365383547, 0.2491470458134029,
        ]),
    ),
    20: (
        np.array([
            0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
            0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
            0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
            0.07652652113349733,
        ]),
        np.array([
            0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
            0.08327674157670475, 0.1019301198172404, 0.1181945319615184,
            0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
            0.1527533871307259,
        ]),
    ),
}


class InvalidCorrelation(ValueError):
    pass


class InvalidLimits(ValueError):
    pass


def gauss_cdf(z):
    """Standard normal CDF, ``0.5 * (1 + erf(z / sqrt(2)))``."""
    return 0.5 * (1.0 + erf(np.asarray(z, dtype=float) / _SQRT2))


def gauss_pdf(z):
    z = np.asarray(z, dtype=float)
    return np.exp(-0.5 * z * z) / math.sqrt(_TWOPI)


def _phi(z: float) -> float:
    # ndtr keeps full relative accuracy in the lower tail, which the
    # orthant recursion below relies on.
    return float(ndtr(z))


def bvn_upper(h: float, k: float, r: float) -> float:
    """P(X > h, Y > k) for a standard bivariate normal with correlation ``r``.

    ``h`` and ``k`` may be infinite. ``|r| = 1`` is handled in closed form.
    """
    if h == math.inf or k == math.inf:
        return 0.0
    if h == -math.inf:
        return 1.0 if k == -math.inf else _phi(-k)
    if k == -math.inf:
        return _phi(-h)
    if r >= 1.0:
        return _phi(-max(h, k))
    if r <= -1.0:
        return max(0.0, _phi(-h) - _phi(k))

    ar = abs(r)
    if ar < 0.3:
        x, w = _GL[6]
    elif ar < 0.75:
        x, w = _GL[12]
    else:
        x, w = _GL[20]

    hk = h * k
    if ar < 0.925:
        hs = (h * h + k * k) / 2.0
        asr = math.asin(r)
        sn = np.sin(asr * (1.0 - x) / 2.0)
        acc = np.sum(w * np.exp((sn * hk - hs) / (1.0 - sn * sn)))
        sn = np.sin(asr * (1.0 + x) / 2.0)
        acc += np.sum(w * np.exp((sn * hk - hs) / (1.0 - sn * sn)))
        bvn = acc * asr / (4.0 * math.pi) + _phi(-h) * _phi(-k)
    else:
        if r < 0:
            k = -k
            hk = -hk
        aas = (1.0 - r) * (1.0 + r)
        a = math.sqrt(aas)
        bs = (h - k) ** 2
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 16.0
        asr = -(bs / aas + hk) / 2.0
        bvn = 0.0
        if asr > -100.0:
            bvn = a * math.exp(asr) * (
                1.0 - c * (bs - aas) * (1.0 - d * bs / 5.0) / 3.0 + c * d * aas * aas / 5.0
            )
        if -hk < 100.0:
            b = math.sqrt(bs)
            sp = math.sqrt(_TWOPI) * _phi(-b / a)
            bvn -= math.exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0)
        a /= 2.0
        for sign in (-1.0, 1.0):
            xs = (a * (sign * x + 1.0)) ** 2
            rs = np.sqrt(1.0 - xs)
            asr_v = -(bs / xs + hk) / 2.0
            mask = asr_v > -100.0
            if np.any(mask):
                xs_m, rs_m = xs[mask], rs[mask]
                sp = 1.0 + c * xs_m * (1.0 + d * xs_m)
                ep = np.exp(-hk * (1.0 - rs_m) / (2.0 * (1.0 + rs_m))) / rs_m
                bvn += float(np.sum(a * w[mask] * np.exp(asr_v[mask]) * (ep - sp)))
        bvn = -bvn / _TWOPI
        if r > 0:
            bvn += _phi(-max(h, k))
        elif h >= k:
            bvn = -bvn
        else:
            # k was negated above; this is P(h < X < k) computed on the
            # side that avoids cancellation.
            span = _phi(k) - _phi(h) if h < 0 else _phi(-h) - _phi(-k)
            bvn = span - bvn
    return min(1.0, max(0.0, float(bvn)))


def bvn_rectangle(xl: float, xu: float, yl: float, yu: float, rho: float) -> float:
    """P(xl <= A <= xu, yl <= B <= yu) with corr(A, B) = rho.

    Limits may be +-inf. Raises :class:`InvalidCorrelation` for ``|rho| > 1``
    and :class:`InvalidLimits` when a lower limit exceeds its upper limit.
    """
    if not -1.0 <= rho <= 1.0:
        raise InvalidCorrelation(f"correlation {rho} outside [-1, 1]")
    if any(math.isnan(v) for v in (xl, xu, yl, yu)):
        raise InvalidLimits("integration limits must not be NaN")
    if xl > xu or yl > yu:
        raise InvalidLimits(f"empty rectangle [{xl}, {xu}] x [{yl}, {yu}]")
    p = (
        bvn_upper(xl, yl, rho)
        - bvn_upper(xu, yl, rho)
        - bvn_upper(xl, yu, rho)
        + bvn_upper(xu, yu, rho)
    )
    return min(1.0, max(0.0, p))
