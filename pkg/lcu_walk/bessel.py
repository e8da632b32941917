"""
Bessel values J_m(z), the normalized LCU coefficients and the truncation
bounds used to size each segment.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import mpmath
import numpy as np

from .errors import CapacityError, NumericError, ParameterError

logger = logging.getLogger(__name__)

K_CAP = 200
RESCALE_LIMIT = 1e200
SERIES_TERM_FLOOR = 1e-18
ABS_SUM_TOLERANCE = 1e-10
SERIES_PRECISION = 50


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    """a_m = J_m(z) / sum_{|m'|<=k} J_m'(z) for m = -k..k."""

    z: float
    k: int
    a: np.ndarray
    abs_sum: float
    raw_norm: float
    bound: float

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.k, self.k + 1)

    def __getitem__(self, m: int) -> float:
        if abs(m) > self.k:
            return 0.0
        return float(self.a[m + self.k])


def _miller_nonnegative(x: float, k: int) -> np.ndarray:
    """J_0..J_k at x > 0 by downward recurrence, normalized with J_0 + 2 sum J_2s = 1."""
    start = k + int(math.ceil(10 + 2 * x))
    values = np.zeros(start + 2)
    values[start] = 1.0
    for m in range(start, 0, -1):
        values[m - 1] = (2.0 * m / x) * values[m] - values[m + 1]
        if abs(values[m - 1]) > RESCALE_LIMIT:
            values[m - 1 :] /= RESCALE_LIMIT
    norm = values[0] + 2.0 * np.sum(values[2 : start + 1 : 2])
    return values[: k + 1] / norm


def bessel_row(z: float, k: int) -> np.ndarray:
    """J_{-k..k}(z) via Miller's recurrence.

    J_{-m} = (-1)^m J_m is applied exactly.
    """
    if k < 0:
        raise ParameterError(f"order k must be nonnegative, got {k}")
    if not math.isfinite(z):
        raise ParameterError(f"z must be finite, got {z}")
    x = abs(z)
    if x == 0:
        positive = np.zeros(k + 1)
        positive[0] = 1.0
    else:
        positive = _miller_nonnegative(x, k)
        if z < 0:
            positive = positive * (-1.0) ** np.arange(k + 1)
    return _mirror(positive)


def _mirror(positive: np.ndarray) -> np.ndarray:
    signs = (-1.0) ** np.arange(1, len(positive))
    negative = (positive[1:] * signs)[::-1]
    return np.concatenate([negative, positive])


def bessel_series(z: float, k: int) -> np.ndarray:
    """Independent power-series values J_{-k..k}(z) evaluated in mpmath.

    Terms are summed until they drop below 1e-18 past the peak term.
    """
    positive = np.zeros(k + 1)
    with mpmath.workdps(SERIES_PRECISION):
        half = mpmath.mpf(z) / 2
        for m in range(k + 1):
            total = mpmath.mpf(0)
            s = 0
            while True:
                term = (-1) ** s * half ** (m + 2 * s) / (mpmath.factorial(s) * mpmath.factorial(m + s))
                total += term
                if s > abs(half) and abs(term) < SERIES_TERM_FLOOR:
                    break
                if half == 0:
                    break
                s += 1
            positive[m] = float(total)
    return _mirror(positive)


def tail_bound(z: float, k: int) -> float:
    """Upper bound 4|z/2|^{k+1}/(k+1)! on sum_{|m|>k} |J_m(z)| for |z| <= k."""
    return 4.0 * _tail_term(z, k)


def _tail_term(z: float, k: int) -> float:
    x = abs(z) / 2.0
    if x == 0:
        return 0.0
    return math.exp((k + 1) * math.log(x) - math.lgamma(k + 2))


def truncation_bound(z: float, k: int, nu_max: float = 1.0) -> float:
    """Certified bound on |sum_m a_m mu^m - e^{i nu z}| on the unit circle.

    With b = |z/2|^{k+1}/(k+1)! the tail of the Bessel series is at most 4b;
    the result is the smaller of the generic 8b/(1-4b) and the
    phase-weighted 4b(nu_max |z| + (k+2) arcsin(nu_max))/(1-4b).
    """
    if abs(z) > k:
        raise ParameterError(f"|z|={abs(z)} exceeds truncation order k={k}")
    if not 0.0 <= nu_max <= 1.0:
        raise ParameterError(f"nu_max must lie in [0, 1], got {nu_max}")
    b = _tail_term(z, k)
    if 4.0 * b >= 1.0:
        return math.inf
    generic = 8.0 * b
    weighted = 4.0 * b * (nu_max * abs(z) + (k + 2) * math.asin(nu_max))
    return min(generic, weighted) / (1.0 - 4.0 * b)


def lcu_coefficients(z: float, k: int, nu_max: float = 1.0) -> CoefficientSet:
    """Normalized, parity-symmetric coefficients a_{-k..k} with their bound."""
    if abs(z) > k:
        raise ParameterError(f"|z|={abs(z)} exceeds truncation order k={k}")
    row = bessel_row(z, k)
    positive = row[k:]
    raw_norm = float(positive[0] + 2.0 * np.sum(positive[2::2]))
    if not raw_norm > 0:
        raise NumericError(f"normalization {raw_norm} is not positive for z={z}, k={k}")
    a = _mirror(positive / raw_norm)
    return CoefficientSet(
        z=float(z),
        k=int(k),
        a=a,
        abs_sum=float(np.sum(np.abs(a))),
        raw_norm=raw_norm,
        bound=truncation_bound(z, k, nu_max),
    )


def abs_sum_estimate(z: float) -> float:
    """sum_m |J_m(z)| to within 1e-10."""
    k = int(math.ceil(abs(z)))
    while tail_bound(z, k) > ABS_SUM_TOLERANCE:
        k += 1
    return float(np.sum(np.abs(bessel_row(z, k))))


def abs_sum_upper_bound(z: float) -> float:
    """sqrt(2k+1) + 4|ez/(2(k+1))|^{k+1} with k = ceil(e|z|/2)."""
    k = int(math.ceil(math.e * abs(z) / 2.0))
    ratio = math.e * abs(z) / (2.0 * (k + 1))
    return math.sqrt(2 * k + 1) + 4.0 * ratio ** (k + 1)


def choose_k(z: float, delta: float, nu_max: float = 1.0, cap: int = K_CAP) -> int:
    """Smallest k >= ceil|z| whose truncation bound is at most delta."""
    if not delta > 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    k = int(math.ceil(abs(z)))
    while truncation_bound(z, k, nu_max) > delta:
        k += 1
        if k > cap:
            raise CapacityError(f"truncation order for z={z}, delta={delta:.3e} exceeds cap {cap}")
    logger.debug("choose_k z=%.6g delta=%.3e nu_max=%.6g -> k=%d", z, delta, nu_max, k)
    return k


def generating_sum(coefficients: CoefficientSet, mu: complex) -> complex:
    """sum_m a_m mu^m."""
    powers = np.power(complex(mu), coefficients.orders.astype(float))
    return complex(np.dot(coefficients.a, powers))


def generating_target(z: float, mu: complex) -> complex:
    """e^{(z/2)(mu - 1/mu)}, equal to e^{i nu z} for nu = Im(mu) on the unit circle."""
    mu = complex(mu)
    return complex(np.exp(0.5 * z * (mu - 1.0 / mu)))


def k_envelope(delta: float) -> float:
    """2 log(1/delta) / log log(1/delta) + 10."""
    inverse = math.log(1.0 / delta)
    return 2.0 * inverse / math.log(max(inverse, math.e)) + 10.0


def describe(coefficients: CoefficientSet, label: Optional[str] = None) -> str:
    prefix = f"{label}: " if label else ""
    return (
        f"{prefix}z={coefficients.z:.6g} k={coefficients.k} "
        f"a={coefficients.abs_sum:.6g} bound={coefficients.bound:.3e}"
    )
