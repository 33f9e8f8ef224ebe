"""Normal-distribution helpers and the extreme-value constants of the
zero-rate scheme.

All logarithms are natural (rates are in nats).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Acklam's rational approximation to the normal quantile (rel. error ~1e-9).
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def phi(x: float) -> float:
    """Standard normal CDF."""
    return 0.5 * math.erfc(-x / _SQRT2)


def q_func(x: float) -> float:
    """Upper tail ``Q(x) = 1 - phi(x)``, computed without cancellation."""
    return 0.5 * math.erfc(x / _SQRT2)


def normal_pdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def _acklam_lower(p: float) -> float:
    # Phi^{-1}(p) for p <= 0.5
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        return num / den
    q = p - 0.5
    r = q * q
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    return num / den


def q_inv(p: float) -> float:
    """Inverse of the upper tail: returns ``x`` with ``Q(x) = p``.

    Raises
    ------
    ValueError
        If ``p`` is not strictly inside ``(0, 1)``.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"q_inv requires 0 < p < 1, got {p!r}")
    # Q(x) = p  <=>  x = -Phi^{-1}(p) = Phi^{-1}(1 - p); work in whichever
    # tail keeps the small probability exact.
    if p <= 0.5:
        x = -_acklam_lower(p)
        for _ in range(2):
            x += (q_func(x) - p) / normal_pdf(x)
    else:
        x = _acklam_lower(1.0 - p)
        for _ in range(2):
            x -= (phi(x) - (1.0 - p)) / normal_pdf(x)
    return x


def phi_inv(p: float) -> float:
    """Standard normal quantile ``Phi^{-1}(p)``."""
    return q_inv(1.0 - p) if p > 0.5 else -q_inv(p)


@dataclass(frozen=True)
class ZeroRateConstants:
    n: int
    k: int
    p_n: float
    q_n: float

    @property
    def alpha_n(self) -> float:
        return self.p_n - self.q_n


def zero_rate_constants(n: int, k: int) -> ZeroRateConstants:
    """Order-statistic constants that fix the zero-rate reconstruction level.

    ``p_n`` lower-bounds the k-th largest of ``n`` standard normals with
    probability ``1 - 1/n``; ``q_n`` upper-bounds their sample mean with the
    same probability.  ``alpha_n = p_n - q_n``.
    """
    if n < 2:
        raise ConfigurationError(f"need n >= 2, got n={n}")
    if not 1 <= k < n:
        raise ConfigurationError(f"need 1 <= k < n, got k={k}, n={n}")
    arg = k * math.log(n) / (n - k + 1)
    if arg >= 1.0:
        raise ConfigurationError(
            f"k*ln(n)/(n-k+1) = {arg:.6g} must be < 1 (n={n}, k={k})")
    return ZeroRateConstants(n=n, k=k, p_n=q_inv(arg), q_n=q_inv(1.0 / n) / math.sqrt(n))


def order_stat_lower_quantile(n: int, i: int, eps: float) -> float:
    """Threshold ``t`` with ``Pr[Z_(i) < t] <= eps`` for the i-th largest of
    ``n`` i.i.d. standard normals.

    ``t = Phi^{-1}(1 - ln(n**(i-1) / eps) / (n - i + 1))``.  The log argument
    must lie strictly inside (0, 1) so the threshold is finite.
    """
    if not 1 <= i <= n:
        raise ValueError(f"need 1 <= i <= n, got i={i}, n={n}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    a = ((i - 1) * math.log(n) - math.log(eps)) / (n - i + 1)
    if not 0.0 < a < 1.0:
        raise ValueError(
            f"ln(n^(i-1)/eps)/(n-i+1) = {a:.6g} must lie in (0, 1) for a finite threshold")
    return q_inv(a)


def gaussian_distortion_rate(rate: float, sigma2: float = 1.0) -> float:
    """``D_G(R) = sigma2 * exp(-2R)``."""
    return sigma2 * math.exp(-2.0 * rate)


def expected_order_statistic(n: int, i: int = 1) -> float:
    """``E[Z_(i)]``, the mean of the i-th largest of ``n`` standard normals,
    by numerical integration of its density."""
    if not 1 <= i <= n:
        raise ValueError(f"need 1 <= i <= n, got i={i}, n={n}")
    from scipy import integrate, special

    log_c = math.lgamma(n + 1) - math.lgamma(i) - math.lgamma(n - i + 1)

    def density(x: float) -> float:
        lp = special.log_ndtr(x)
        lq = special.log_ndtr(-x)
        return math.exp(log_c + (n - i) * lp + (i - 1) * lq - 0.5 * x * x) * _INV_SQRT_2PI

    centre = q_inv(min(0.5, i / (n + 1.0))) if n > 1 else 0.0
    val, _ = integrate.quad(lambda x: x * density(x), centre - 12.0, centre + 12.0,
                            points=[centre], limit=200, epsabs=1e-12, epsrel=1e-11)
    return val
