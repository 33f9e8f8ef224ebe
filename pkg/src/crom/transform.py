"""Orthogonal transforms used to rotate the residual between iterations.

Every transform acts on axis 0, so a ``(n,)`` block and an ``(n, T)`` batch of
blocks are handled the same way.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy import fft as _fft

from .errors import ConfigurationError


def _check_dim(x: np.ndarray, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[0] != n:
        raise ValueError(f"expected a block of length {n}, got shape {x.shape}")
    return x


def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


class OrthogonalTransform:
    """Length-preserving linear map with forward and adjoint application."""

    kind: str = "abstract"

    def __init__(self, n: int):
        self.n = n

    def apply(self, x):
        return self._forward(_check_dim(x, self.n))

    def apply_adjoint(self, x):
        return self._adjoint(_check_dim(x, self.n))

    def to_matrix(self) -> np.ndarray:
        return self._forward(np.eye(self.n))

    def _forward(self, x):  # pragma: no cover - abstract
        raise NotImplementedError

    def _adjoint(self, x):  # pragma: no cover - abstract
        raise NotImplementedError


class DenseTransform(OrthogonalTransform):
    kind = "dense"

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"dense transform needs a square matrix, got {matrix.shape}")
        super().__init__(matrix.shape[0])
        self.matrix = matrix

    def _forward(self, x):
        return self.matrix @ x

    def _adjoint(self, x):
        return self.matrix.T @ x

    def to_matrix(self):
        return self.matrix.copy()


class GivensLayer(OrthogonalTransform):
    """One sparse layer of ``n/2`` disjoint Givens rotations.

    Layer ``r`` (1-based, ``n = 2**s``, ``1 <= r <= s``) splits the block into
    ``2**(r-1)`` contiguous groups of size ``b = n / 2**(r-1)`` and rotates each
    coordinate ``p`` of a group's first half against ``p + b/2``::

        y[p]       = cos(t) * x[p] - sin(t) * x[p + b/2]
        y[p + b/2] = sin(t) * x[p] + cos(t) * x[p + b/2]

    Angles are consumed group by group, in coordinate order.
    """

    kind = "givens"

    def __init__(self, n: int, r: int, thetas):
        if not is_power_of_two(n) or n < 2:
            raise ConfigurationError(f"Givens layers need n = 2**s with s >= 1, got n={n}")
        s = n.bit_length() - 1
        if not 1 <= r <= s:
            raise ConfigurationError(f"layer index r={r} outside [1, {s}] for n={n}")
        thetas = np.asarray(thetas, dtype=np.float64)
        if thetas.shape != (n // 2,):
            raise ConfigurationError(f"need exactly {n // 2} angles, got shape {thetas.shape}")
        super().__init__(n)
        self.r = r
        self.thetas = thetas
        self._groups = 1 << (r - 1)
        self._half = n // (2 * self._groups)
        self._cos = np.cos(thetas).reshape(self._groups, self._half)
        self._sin = np.sin(thetas).reshape(self._groups, self._half)

    def _split(self, x):
        v = x.reshape(self._groups, 2, self._half, *x.shape[1:])
        c = self._cos.reshape(self._cos.shape + (1,) * (x.ndim - 1))
        s = self._sin.reshape(c.shape)
        return v[:, 0], v[:, 1], c, s

    def _forward(self, x):
        top, bot, c, s = self._split(x)
        return np.stack((c * top - s * bot, s * top + c * bot), axis=1).reshape(x.shape)

    def _adjoint(self, x):
        top, bot, c, s = self._split(x)
        return np.stack((c * top + s * bot, c * bot - s * top), axis=1).reshape(x.shape)


class Dct2(OrthogonalTransform):
    """Orthonormal DCT-II, ``C[j, t] = c_j sqrt(2/n) cos(pi (2t + 1) j / (2n))``."""

    kind = "dct2"

    def _forward(self, x):
        return _fft.dct(x, type=2, norm="ortho", axis=0)

    def _adjoint(self, x):
        return _fft.idct(x, type=2, norm="ortho", axis=0)


class Composition(OrthogonalTransform):
    """Applies ``parts[0]`` first, then ``parts[1]``, and so on."""

    kind = "composition"

    def __init__(self, parts: Sequence[OrthogonalTransform]):
        if not parts:
            raise ValueError("composition needs at least one transform")
        n = parts[0].n
        if any(p.n != n for p in parts):
            raise ValueError("all composed transforms must share one dimension")
        super().__init__(n)
        self.parts = tuple(parts)

    def _forward(self, x):
        for p in self.parts:
            x = p._forward(x)
        return x

    def _adjoint(self, x):
        for p in reversed(self.parts):
            x = p._adjoint(x)
        return x


def compose(*parts: OrthogonalTransform) -> Composition:
    """``compose(a, b)`` applies ``b`` first, then ``a`` (matrix product ``a @ b``)."""
    return Composition(parts[::-1])


def apply(t: OrthogonalTransform, x):
    return t.apply(x)


def apply_adjoint(t: OrthogonalTransform, x):
    return t.apply_adjoint(x)


def make_dense_haar(n: int, rng: np.random.Generator) -> DenseTransform:
    """Haar-distributed orthogonal matrix from the QR factorisation of an
    i.i.d. Gaussian matrix, with ``R``'s diagonal forced positive."""
    if n < 1:
        raise ConfigurationError(f"n must be positive, got {n}")
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return DenseTransform(q * d)


def make_givens_layer(n: int, r: int, thetas) -> GivensLayer:
    return GivensLayer(n, r, thetas)


def make_dct2(n: int) -> Dct2:
    if n < 1:
        raise ConfigurationError(f"n must be positive, got {n}")
    return Dct2(n)


def identity(n: int) -> DenseTransform:
    return DenseTransform(np.eye(n))


class Scheme(enum.IntEnum):
    UNIFORM_HAAR = 0
    SPARSE_GIVENS = 1
    SPARSE_GIVENS_THEN_DCT = 2

    @classmethod
    def parse(cls, name: str | int | "Scheme") -> "Scheme":
        if isinstance(name, cls):
            return name
        if isinstance(name, int):
            return cls(name)
        key = name.strip().lower().replace("-", "_")
        aliases = {"haar": cls.UNIFORM_HAAR, "uniform_haar": cls.UNIFORM_HAAR,
                   "givens": cls.SPARSE_GIVENS, "sparse_givens": cls.SPARSE_GIVENS,
                   "givens_dct": cls.SPARSE_GIVENS_THEN_DCT,
                   "sparse_givens_then_dct": cls.SPARSE_GIVENS_THEN_DCT}
        try:
            return aliases[key]
        except KeyError:
            raise ConfigurationError(f"unknown transform scheme {name!r}") from None


@dataclass(frozen=True)
class TransformScheme:
    """Seeded recipe for the transform sequence ``A_1, A_2, ...``."""

    scheme: Scheme
    seed: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.n < 1:
            raise ConfigurationError(f"n must be positive, got {self.n}")
        if self.scheme != Scheme.UNIFORM_HAAR and (not is_power_of_two(self.n) or self.n < 2):
            raise ConfigurationError(
                f"{self.scheme.name} needs n to be a power of two >= 2, got n={self.n}")


def givens_layer_index(i: int, n: int) -> int:
    """Layer used at (1-based) position ``i``: ``((i - 1) mod s) + 1``."""
    s = n.bit_length() - 1
    return (i - 1) % s + 1


def iter_sequence(scheme: TransformScheme) -> Iterator[OrthogonalTransform]:
    """Endless, deterministic stream ``A_1, A_2, ...`` for ``scheme``.

    Any prefix is independent of how far the stream is consumed.
    """
    rng = np.random.default_rng(scheme.seed)
    n = scheme.n
    dct = make_dct2(n) if scheme.scheme == Scheme.SPARSE_GIVENS_THEN_DCT else None
    for i in itertools.count(1):
        if scheme.scheme == Scheme.UNIFORM_HAAR:
            yield make_dense_haar(n, rng)
            continue
        layer = GivensLayer(n, givens_layer_index(i, n), rng.uniform(0.0, 2.0 * math.pi, n // 2))
        yield layer if dct is None else Composition((layer, dct))


def build_sequence(scheme: TransformScheme, count: int) -> list[OrthogonalTransform]:
    if count < 1:
        raise ConfigurationError(f"count must be positive, got {count}")
    return list(itertools.islice(iter_sequence(scheme), count))
