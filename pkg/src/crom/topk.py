"""Selection of the k largest coordinates and the matching unit direction."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class IndexMessage:
    """Sorted, distinct 0-based indices of the ``k`` selected coordinates."""

    indices: tuple[int, ...]
    n: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if not 1 <= len(idx) < self.n:
            raise ValueError(f"need 1 <= k < n, got k={len(idx)}, n={self.n}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"indices must be strictly increasing: {idx}")
        if idx[0] < 0 or idx[-1] >= self.n:
            raise ValueError(f"indices out of range [0, {self.n}): {idx}")

    @property
    def k(self) -> int:
        return len(self.indices)


def top_k_indices(x: np.ndarray, k: int) -> np.ndarray:
    """Ascending indices of the ``k`` largest entries of a 1-D array.

    Ranking is by ``(value, -index)``: among equal values the smaller index
    wins.  Average cost is linear (partition, not sort).
    """
    n = x.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    if k == 1:
        return np.array([int(np.argmax(x))])
    kth = np.partition(x, n - k)[n - k]
    above = np.flatnonzero(x > kth)
    tied = np.flatnonzero(x == kth)[: k - above.size]
    return np.sort(np.concatenate((above, tied)))


def g_k(x, k: int) -> IndexMessage:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"g_k expects a 1-D block, got shape {x.shape}")
    return IndexMessage(tuple(top_k_indices(x, k).tolist()), x.shape[0])


def direction_levels(n: int, k: int) -> tuple[float, float]:
    """(selected, unselected) coordinate values of the unit direction."""
    return math.sqrt((n - k) / (n * k)), -math.sqrt(k / (n * (n - k)))


def build_direction(m: IndexMessage) -> np.ndarray:
    """Zero-sum unit vector pointing at the selected coordinates."""
    hi, lo = direction_levels(m.n, m.k)
    u = np.full(m.n, lo)
    u[list(m.indices)] = hi
    return u
