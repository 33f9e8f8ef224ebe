"""Zero-rate compressor: send the positions of the k largest samples, nothing
else; the decoder places a fixed level there and spreads the opposite mass
evenly over the rest."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .stats import zero_rate_constants
from .topk import IndexMessage, g_k


def default_k(n: int, beta: float = 0.0) -> int:
    """``ceil(ln(n) ** beta)``; ``beta = 0`` gives a single index."""
    return max(1, math.ceil(math.log(n) ** beta))


def log_binomial(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


@dataclass(frozen=True)
class ZeroRateCode:
    n: int
    k: int = 1
    alpha: float | None = None

    def __post_init__(self):
        if not 1 <= self.k < self.n:
            raise ConfigurationError(f"need 1 <= k < n, got k={self.k}, n={self.n}")
        if self.alpha is None:
            object.__setattr__(self, "alpha", zero_rate_constants(self.n, self.k).alpha_n)
        if not self.alpha > 0:
            raise ConfigurationError(f"alpha must be positive, got {self.alpha}")

    @property
    def rate(self) -> float:
        """Nats per symbol, ``ln C(n, k) / n``."""
        return log_binomial(self.n, self.k) / self.n


def zr_encode(x, code: ZeroRateCode) -> IndexMessage:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (code.n,):
        raise ValueError(f"expected a block of length {code.n}, got shape {x.shape}")
    return g_k(x, code.k)


def zr_decode(m: IndexMessage, code: ZeroRateCode) -> np.ndarray:
    if m.n != code.n or m.k != code.k:
        raise ValueError(f"message (n={m.n}, k={m.k}) does not match code (n={code.n}, k={code.k})")
    xhat = np.full(code.n, -code.k * code.alpha / (code.n - code.k))
    xhat[list(m.indices)] = code.alpha
    return xhat
