"""Zero-rate code for the unit-variance AWGN channel.

Message ``m`` is sent as a single tall spike at position ``m`` with the
opposite mass spread over the other ``n - 1`` positions; the receiver picks
the largest output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelCode:
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least two messages, got n={self.n}")

    @property
    def eps_n(self) -> float:
        """Solves ``(1 + n eps) / (n - 1) = ln(n) ** (-1/3)``; negative for some small n."""
        n = self.n
        return ((n - 1) * math.log(n) ** (-1.0 / 3.0) - 1.0) / n

    @property
    def peak(self) -> float:
        return (1.0 + self.eps_n) * math.sqrt(2.0 * math.log(self.n))

    @property
    def power(self) -> float:
        """Average power ``P_n = 2 (1 + eps)^2 ln(n) / (n - 1)``."""
        return 2.0 * (1.0 + self.eps_n) ** 2 * math.log(self.n) / (self.n - 1)

    @property
    def rate(self) -> float:
        """``ln(n) / n`` nats per channel use."""
        return math.log(self.n) / self.n

    @property
    def capacity(self) -> float:
        return 0.5 * math.log1p(self.power)

    @property
    def capacity_ratio(self) -> float:
        return self.rate / self.capacity


def ch_encode(m: int, code: ChannelCode) -> np.ndarray:
    if not 0 <= m < code.n:
        raise ValueError(f"message {m} outside [0, {code.n})")
    x = np.full(code.n, -code.peak / (code.n - 1))
    x[m] = code.peak
    return x


def ch_decode(y) -> int:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise ValueError(f"expected a 1-D channel output, got shape {y.shape}")
    return int(np.argmax(y))


def error_rate(code: ChannelCode, trials: int, rng: np.random.Generator, batch: int = 256) -> float:
    """Monte Carlo block error rate with uniformly random messages."""
    errors = 0
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        msgs = rng.integers(0, code.n, size=b)
        y = np.full((b, code.n), -code.peak / (code.n - 1))
        y[np.arange(b), msgs] = code.peak
        y += rng.standard_normal((b, code.n))
        errors += int(np.count_nonzero(np.argmax(y, axis=1) != msgs))
        done += b
    return errors / trials
