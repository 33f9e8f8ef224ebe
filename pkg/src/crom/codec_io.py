"""``.crom`` stream format.

Layout (little-endian header, then an MSB-first bit-packed body)::

    magic     4s   b"CROM"
    version   u8   1
    n         u32
    k         u16
    L         u32
    scheme    u8   0 haar, 1 givens, 2 givens+dct
    seed      u64
    sigma2    f64
    schedule  u8   0 simulation, 1 theorem
    gamma     f64
    R         f64

The body holds ``L`` colex ranks of ``ceil(log2 C(n, k))`` bits each, back to
back, zero-padded to a whole byte.  Cutting the stream at any byte leaves
every complete message before the cut decodable.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Sequence

from .codec import CromEncoding, CromParams, Schedule
from .errors import ConfigurationError, FormatError
from .topk import IndexMessage
from .transform import Scheme, TransformScheme

MAGIC = b"CROM"
VERSION = 1
_HEADER = struct.Struct("<4sBIHIBQdBdd")
HEADER_SIZE = _HEADER.size
MAX_RANK_BITS = 128


def subset_rank(m: IndexMessage) -> int:
    """Colex rank ``sum_j C(m_j, j + 1)`` of a sorted index set."""
    return sum(math.comb(v, j + 1) for j, v in enumerate(m.indices))


def subset_unrank(rank: int, n: int, k: int) -> IndexMessage:
    total = math.comb(n, k)
    if not 0 <= rank < total:
        raise FormatError(f"rank {rank} outside [0, C({n}, {k}) = {total})")
    out = []
    hi = n - 1
    for j in range(k, 0, -1):
        # largest v in [j - 1, hi] with C(v, j) <= rank
        lo = j - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if math.comb(mid, j) <= rank:
                lo = mid
            else:
                hi = mid - 1
        out.append(lo)
        rank -= math.comb(lo, j)
        hi = lo - 1
    return IndexMessage(tuple(reversed(out)), n)


def rank_width(n: int, k: int) -> int:
    """Bits per message, ``ceil(log2 C(n, k))``."""
    return (math.comb(n, k) - 1).bit_length()


@dataclass(frozen=True)
class StreamContents:
    params: CromParams
    messages: list[IndexMessage]
    # True when fewer than L messages were recoverable
    truncated: bool
    # bits of an incomplete trailing message that were dropped
    discarded_bits: int = 0


def write_header(p: CromParams) -> bytes:
    return _HEADER.pack(MAGIC, VERSION, p.n, p.k, p.L, int(p.scheme.scheme), p.scheme.seed,
                        p.sigma2, int(p.schedule), p.gamma, p.R)


def read_header(data: bytes) -> CromParams:
    if len(data) < HEADER_SIZE:
        raise FormatError(f"stream is {len(data)} bytes, header needs {HEADER_SIZE}")
    magic, version, n, k, L, scheme_id, seed, sigma2, schedule_id, gamma, R = \
        _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    try:
        p = CromParams(n=n, k=k, R=R, scheme=TransformScheme(Scheme(scheme_id), seed, n),
                       sigma2=sigma2, gamma=gamma, schedule=Schedule(schedule_id))
    except (ConfigurationError, ValueError) as exc:
        raise FormatError(f"header holds invalid parameters: {exc}") from exc
    if p.L != L:
        raise FormatError(f"header L={L} disagrees with L={p.L} derived from R={R}")
    return p


def write_stream(enc: CromEncoding) -> bytes:
    p = enc.params
    if len(enc.messages) != p.L:
        raise ValueError(f"encoding has {len(enc.messages)} messages, params say L={p.L}")
    return write_header(p) + pack_messages(enc.messages, p.n, p.k)


def pack_messages(messages: Sequence[IndexMessage], n: int, k: int) -> bytes:
    width = rank_width(n, k)
    if width > MAX_RANK_BITS:
        raise ConfigurationError(f"C({n}, {k}) needs {width} bits, limit is {MAX_RANK_BITS}")
    acc = 0
    for m in messages:
        if m.n != n or m.k != k:
            raise ValueError(f"message (n={m.n}, k={m.k}) does not match (n={n}, k={k})")
        acc = (acc << width) | subset_rank(m)
    bits = width * len(messages)
    pad = -bits % 8
    return (acc << pad).to_bytes((bits + pad) // 8, "big")


def read_stream(data: bytes, max_messages: int | None = None) -> StreamContents:
    """Parse a possibly truncated stream.

    Returns every complete message present (at most ``max_messages``);
    a trailing partial message is dropped and reported.
    """
    data = bytes(data)
    p = read_header(data)
    width = rank_width(p.n, p.k)
    body = data[HEADER_SIZE:]
    avail = 8 * len(body)
    count = min(p.L, avail // width)
    truncated = count < p.L
    discarded = avail - count * width if truncated else 0
    if max_messages is not None:
        count = min(count, max_messages)
    acc = int.from_bytes(body, "big")
    mask = (1 << width) - 1
    msgs = []
    for i in range(count):
        shift = avail - width * (i + 1)
        msgs.append(subset_unrank((acc >> shift) & mask, p.n, p.k))
    return StreamContents(params=p, messages=msgs, truncated=truncated, discarded_bits=discarded)


def stream_size_bits(n: int, k: int, L: int) -> int:
    body = L * rank_width(n, k)
    return 8 * HEADER_SIZE + body + (-body % 8)
