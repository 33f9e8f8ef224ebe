"""Sequential sparse-regression-code baseline.

``L`` sub-codebooks of ``M`` i.i.d. N(0, 1) codewords are drawn from a seed.
Each step picks the codeword with the largest inner product against the
residual and subtracts a scaled copy of it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigurationError


def geometric_steps(n: int, rate: float, L: int, sigma2: float = 1.0) -> tuple[float, ...]:
    """``c_i = sqrt(n sigma2 (1 - exp(-2R/L))) exp(-(i-1) R/L)``."""
    d = rate / L
    head = math.sqrt(n * sigma2 * -math.expm1(-2 * d))
    return tuple(head * math.exp(-i * d) for i in range(L))


@dataclass(frozen=True)
class SparcParams:
    n: int
    M: int
    L: int
    R: float
    seed: int = 0
    c: tuple[float, ...] = ()
    normalize: bool = True

    def __post_init__(self):
        if self.M < 1 or self.L < 1 or self.n < 1:
            raise ConfigurationError(f"need n, M, L >= 1, got n={self.n}, M={self.M}, L={self.L}")
        c = tuple(self.c) or geometric_steps(self.n, self.R, self.L)
        if len(c) != self.L or not all(ci > 0 for ci in c):
            raise ConfigurationError(f"need {self.L} positive step sizes, got {c!r}")
        object.__setattr__(self, "c", c)

    @classmethod
    def for_rate(cls, n: int, M: int, rate: float, seed: int = 0, sigma2: float = 1.0,
                 normalize: bool = True) -> "SparcParams":
        """``L = floor(n R / ln M)`` so that ``M**L`` is at most ``e**(nR)``."""
        if M < 2:
            raise ConfigurationError(f"M must be at least 2 to carry information, got {M}")
        L = math.floor(n * rate / math.log(M))
        if L < 1:
            raise ConfigurationError(f"rate {rate} is below one sub-codebook index")
        return cls(n=n, M=M, L=L, R=rate, seed=seed,
                   c=geometric_steps(n, rate, L, sigma2), normalize=normalize)

    @property
    def step_rate(self) -> float:
        return math.log(self.M) / self.n


def iter_codebooks(p: SparcParams) -> Iterator[np.ndarray]:
    """Sub-codebooks as ``(n, M)`` arrays, columns are codewords."""
    rng = np.random.default_rng(p.seed)
    for _ in range(p.L):
        yield rng.standard_normal((p.n, p.M))


def _scaled(book: np.ndarray, p: SparcParams) -> np.ndarray:
    if p.normalize:
        return book / np.linalg.norm(book, axis=0)
    return book / math.sqrt(p.n)


def _books(p: SparcParams, codebooks):
    books = iter_codebooks(p) if codebooks is None else iter(codebooks)
    for b in books:
        b = np.asarray(b, dtype=np.float64)
        if b.shape != (p.n, p.M):
            raise ValueError(f"sub-codebook has shape {b.shape}, expected {(p.n, p.M)}")
        yield b


def encode_columns(X, p: SparcParams, codebooks=None):
    """Returns ``(indices, residual_sq)``: ``(L, T)`` ints and ``(L+1, T)``."""
    X = np.array(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != p.n:
        raise ValueError(f"expected shape ({p.n}, T), got {X.shape}")
    T = X.shape[1]
    idx = np.empty((p.L, T), dtype=np.int64)
    res = np.empty((p.L + 1, T))
    for i, book in zip(range(p.L), _books(p, codebooks)):
        res[i] = np.einsum("ij,ij->j", X, X)
        # argmax returns the first (smallest) index on ties
        idx[i] = np.argmax(book.T @ X, axis=0)
        X -= p.c[i] * _scaled(book[:, idx[i]], p)
    res[p.L] = np.einsum("ij,ij->j", X, X)
    return idx, res


def sparc_encode(x, p: SparcParams, codebooks: Sequence[np.ndarray] | None = None) -> list[int]:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (p.n,):
        raise ValueError(f"expected a block of length {p.n}, got shape {x.shape}")
    idx, _ = encode_columns(x[:, None], p, codebooks)
    return idx[:, 0].tolist()


def decode_columns(indices, p: SparcParams, codebooks=None) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.int64)
    i, T = indices.shape
    if i > p.L:
        raise ValueError(f"{i} indices exceed L={p.L}")
    if indices.size and (indices.min() < 0 or indices.max() >= p.M):
        raise ValueError(f"codeword index outside [0, {p.M})")
    xhat = np.zeros((p.n, T))
    for j, book in zip(range(i), _books(p, codebooks)):
        xhat += p.c[j] * _scaled(book[:, indices[j]], p)
    return xhat


def sparc_decode(indices: Sequence[int], p: SparcParams,
                 codebooks: Sequence[np.ndarray] | None = None) -> np.ndarray:
    """Weighted sum of the selected codewords; any prefix of ``indices`` works."""
    return decode_columns(np.asarray(indices, dtype=np.int64).reshape(-1, 1), p, codebooks)[:, 0]


def trace_columns(X, indices, p: SparcParams, codebooks=None) -> np.ndarray:
    """``||x - xhat^(i)||^2 / n`` for every prefix ``i = 0 .. len(indices)``."""
    X = np.asarray(X, dtype=np.float64)
    out = np.empty((len(indices) + 1, X.shape[1]))
    out[0] = np.einsum("ij,ij->j", X, X) / p.n
    D = X.copy()
    for j, book in zip(range(len(indices)), _books(p, codebooks)):
        D -= p.c[j] * _scaled(book[:, indices[j]], p)
        out[j + 1] = np.einsum("ij,ij->j", D, D) / p.n
    return out

