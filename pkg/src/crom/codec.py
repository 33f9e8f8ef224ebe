"""Iterative compression with random orthogonal matrices.

Each iteration describes the ``k`` largest coordinates of the current
residual, subtracts a scaled zero-sum direction pointing at them and rotates
what is left with the next orthogonal transform.  Decoding any prefix of the
message list gives the reconstruction for the rate consumed so far.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ConfigurationError
from .topk import IndexMessage, direction_levels, top_k_indices
from .transform import OrthogonalTransform, Scheme, TransformScheme, iter_sequence
from .zero_rate import log_binomial


class Schedule(enum.IntEnum):
    SIMULATION = 0
    THEOREM = 1

    @classmethod
    def parse(cls, name) -> "Schedule":
        if isinstance(name, cls):
            return name
        if isinstance(name, int):
            return cls(name)
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ConfigurationError(f"unknown schedule {name!r}") from None


def iterations_for_rate(n: int, k: int, rate: float) -> int:
    """``floor(n R / ln C(n, k))``."""
    return math.floor(n * rate / log_binomial(n, k))


@dataclass(frozen=True)
class CromParams:
    n: int
    k: int
    R: float
    scheme: TransformScheme
    sigma2: float = 1.0
    gamma: float = 0.0
    schedule: Schedule = Schedule.SIMULATION
    L: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "schedule", Schedule.parse(self.schedule))
        if not 1 <= self.k < self.n:
            raise ConfigurationError(f"need 1 <= k < n, got k={self.k}, n={self.n}")
        if self.scheme.n != self.n:
            raise ConfigurationError(f"transform scheme is for n={self.scheme.n}, codec has n={self.n}")
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise ConfigurationError(f"sigma2 must be positive, got {self.sigma2}")
        if not (self.R > 0 and math.isfinite(self.R)):
            raise ConfigurationError(f"rate must be positive, got {self.R}")
        L = iterations_for_rate(self.n, self.k, self.R)
        if L < 1:
            raise ConfigurationError(
                f"rate {self.R} is below one message (ln C(n,k)/n = "
                f"{log_binomial(self.n, self.k) / self.n:.6g} nats/symbol)")
        object.__setattr__(self, "L", L)
        if self.gamma < 0:
            raise ConfigurationError(f"gamma must be non-negative, got {self.gamma}")
        if self.schedule == Schedule.THEOREM:
            # the last step has the smallest real part; e^{-a} > e^{a} gamma
            a = (L - 1) * self.R / L
            if not self.gamma < math.exp(-2 * a):
                raise ConfigurationError(
                    f"gamma={self.gamma} makes alpha_{L} imaginary: need "
                    f"gamma < exp(-2 (L-1) R / L) = {math.exp(-2 * a):.6g}")

    @classmethod
    def create(cls, n: int, k: int = 1, rate: float = 1.0, scheme="haar", seed: int = 0,
               **kwargs) -> "CromParams":
        return cls(n=n, k=k, R=rate, scheme=TransformScheme(Scheme.parse(scheme), seed, n), **kwargs)

    @property
    def step_rate(self) -> float:
        """Nats per symbol spent by one message, ``ln C(n, k) / n``."""
        return log_binomial(self.n, self.k) / self.n


def alpha_i(i: int, p: CromParams) -> float:
    """Scale of the i-th (1-based) correction step."""
    if not 1 <= i <= p.L:
        raise ConfigurationError(f"iteration {i} outside [1, {p.L}]")
    d = p.R / p.L
    base = p.n * p.sigma2 * -math.expm1(-2 * d)
    if p.schedule == Schedule.SIMULATION:
        return math.sqrt(base) * math.exp(-(i - 1) * d)
    lo = math.exp(-(i - 1) * d)
    hi = math.exp((i - 1) * d) * p.gamma
    if not lo > hi:
        raise ConfigurationError(
            f"alpha_{i} is imaginary for gamma={p.gamma}: need exp(-2 (i-1) R/L) > gamma")
    return math.sqrt(base * (lo + hi) * (lo - hi))


def alphas(p: CromParams) -> np.ndarray:
    return np.array([alpha_i(i, p) for i in range(1, p.L + 1)])


@dataclass(frozen=True)
class CromEncoding:
    messages: tuple[IndexMessage, ...]
    final_residual_norm: float
    params: CromParams
    # ||X^(i)|| for i = 1 .. L+1
    residual_norms: tuple[float, ...] = ()


@dataclass(frozen=True)
class DistortionTrace:
    iterations: np.ndarray
    rates: np.ndarray
    distortions: np.ndarray

    def rows(self):
        return list(zip(self.iterations.tolist(), self.rates.tolist(), self.distortions.tolist()))


def _transforms(p: CromParams, transforms: Iterable[OrthogonalTransform] | None) -> Iterator[OrthogonalTransform]:
    it = iter(iter_sequence(p.scheme) if transforms is None else transforms)
    for t in it:
        if t.n != p.n:
            raise ValueError(f"transform has dimension {t.n}, codec has n={p.n}")
        yield t


def _directions(idx: np.ndarray, n: int, k: int) -> np.ndarray:
    """Columns of unit directions for an index array of shape ``(T, k)``."""
    hi, lo = direction_levels(n, k)
    u = np.full((n, idx.shape[0]), lo)
    u[idx, np.arange(idx.shape[0])[:, None]] = hi
    return u


def _select(x: np.ndarray, k: int) -> np.ndarray:
    if k == 1:
        return np.argmax(x, axis=0)[:, None]
    return np.stack([top_k_indices(x[:, t], k) for t in range(x.shape[1])])


def encode_columns(X, p: CromParams, transforms=None):
    """Encode every column of an ``(n, T)`` array.

    Returns ``(indices, residual_sq)`` with ``indices`` of shape ``(L, T, k)``
    and ``residual_sq[i - 1] = ||X^(i)||^2`` for ``i = 1 .. L+1``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != p.n:
        raise ValueError(f"expected shape ({p.n}, T), got {X.shape}")
    ts = _transforms(p, transforms)
    if transforms is not None:
        ts = list(itertools.islice(ts, p.L + 1))
        if len(ts) < p.L + 1:
            raise ValueError(f"encoding needs L+1={p.L + 1} transforms, got {len(ts)}")
        ts = iter(ts)
    a = alphas(p)
    indices = np.empty((p.L, X.shape[1], p.k), dtype=np.int64)
    residual_sq = np.empty((p.L + 1, X.shape[1]))
    X = next(ts).apply(X)
    for i in range(p.L):
        residual_sq[i] = np.einsum("ij,ij->j", X, X)
        idx = _select(X, p.k)
        indices[i] = idx
        X = next(ts).apply(X - a[i] * _directions(idx, p.n, p.k))
    residual_sq[p.L] = np.einsum("ij,ij->j", X, X)
    return indices, residual_sq


def crom_encode(x, p: CromParams, transforms: Sequence[OrthogonalTransform] | None = None) -> CromEncoding:
    """Encode one block.  ``transforms`` overrides the scheme's sequence
    ``A_1 .. A_{L+1}`` (used for hand-built tests)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (p.n,):
        raise ValueError(f"expected a block of length {p.n}, got shape {x.shape}")
    idx, res = encode_columns(x[:, None], p, transforms)
    msgs = tuple(IndexMessage(tuple(row[0].tolist()), p.n) for row in idx)
    norms = tuple(math.sqrt(v) for v in res[:, 0])
    return CromEncoding(messages=msgs, final_residual_norm=norms[-1], params=p, residual_norms=norms)


def _message_array(messages: Sequence[IndexMessage], p: CromParams) -> np.ndarray:
    for m in messages:
        if m.n != p.n or m.k != p.k:
            raise ValueError(f"message (n={m.n}, k={m.k}) does not match params (n={p.n}, k={p.k})")
    if len(messages) > p.L:
        raise ValueError(f"{len(messages)} messages exceed L={p.L}")
    return np.array([m.indices for m in messages], dtype=np.int64).reshape(len(messages), 1, p.k)


def decode_columns(indices: np.ndarray, p: CromParams, transforms=None) -> np.ndarray:
    """Reconstruct from an index array of shape ``(i, T, k)``, nested form."""
    i, T = indices.shape[:2]
    if i == 0:
        return np.zeros((p.n, T))
    ts = list(itertools.islice(_transforms(p, transforms), i))
    if len(ts) < i:
        raise ValueError(f"need {i} transforms, got {len(ts)}")
    a = alphas(p)
    v = np.zeros((p.n, T))
    for j in range(i - 1, -1, -1):
        v = ts[j].apply_adjoint(a[j] * _directions(indices[j], p.n, p.k) + v)
    return v


def decode_prefix(messages: Sequence[IndexMessage], p: CromParams,
                  transforms: Sequence[OrthogonalTransform] | None = None) -> np.ndarray:
    """Reconstruction from the first ``len(messages)`` messages."""
    return decode_columns(_message_array(messages, p), p, transforms)[:, 0]


def trace_columns(X, indices: np.ndarray, p: CromParams, transforms=None) -> np.ndarray:
    """Distortion ``||x - xhat^(i)||^2 / n`` for ``i = 0 .. len(indices)``,
    per column.  Returns shape ``(i + 1, T)``.

    Works in the rotated frame: both ``x`` and the running reconstruction
    are carried through ``A_i ... A_1``, so all prefixes cost one transform
    application each.
    """
    X = np.asarray(X, dtype=np.float64)
    a = alphas(p)
    out = np.empty((indices.shape[0] + 1, X.shape[1]))
    out[0] = np.einsum("ij,ij->j", X, X) / p.n
    W, Y = X, np.zeros_like(X)
    for j, t in zip(range(indices.shape[0]), _transforms(p, transforms)):
        W = t.apply(W)
        Y = t.apply(Y) + a[j] * _directions(indices[j], p.n, p.k)
        D = W - Y
        out[j + 1] = np.einsum("ij,ij->j", D, D) / p.n
    return out


def distortion_trace(x, enc: CromEncoding, transforms=None) -> DistortionTrace:
    p = enc.params
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (p.n,):
        raise ValueError(f"expected a block of length {p.n}, got shape {x.shape}")
    d = trace_columns(x[:, None], _message_array(enc.messages, p), p, transforms)[:, 0]
    it = np.arange(d.size)
    return DistortionTrace(iterations=it, rates=it * p.step_rate, distortions=d)


def estimate_sigma2(x) -> float:
    """Empirical second moment ``mean(x**2)``."""
    x = np.asarray(x, dtype=np.float64)
    return float(np.dot(x, x) / x.size)
