"""Sources and the Monte Carlo distortion-rate driver."""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

from . import codec, sparc
from .errors import ConfigurationError
from .stats import gaussian_distortion_rate
from .transform import Scheme
from .zero_rate import ZeroRateCode, zr_decode, zr_encode

CSV_VERSION = "# crom-curve v1"
CSV_FIELDS = ("codec", "n", "k", "M", "scheme", "source", "rate_nats", "stage",
              "stage_rate", "mean_distortion", "std_distortion", "trials", "d_gaussian")


class SourceKind(enum.Enum):
    GAUSSIAN = "gaussian"
    LAPLACIAN = "laplacian"
    UNIFORM = "uniform"
    GAUSS_MARKOV = "gauss-markov"


@dataclass(frozen=True)
class SourceSpec:
    kind: SourceKind = SourceKind.GAUSSIAN
    variance: float = 1.0
    rho: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", SourceKind(self.kind))
        if self.variance < 0:
            raise ConfigurationError(f"variance must be non-negative, got {self.variance}")
        if not -1.0 < self.rho < 1.0:
            raise ConfigurationError(f"rho must lie in (-1, 1), got {self.rho}")

    @property
    def label(self) -> str:
        if self.kind == SourceKind.GAUSS_MARKOV:
            return f"{self.kind.value}(rho={self.rho:g})"
        return self.kind.value


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream per (seed, trial), regardless of evaluation order."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))


def generate_block(s: SourceSpec, n: int, trial: int = 0) -> np.ndarray:
    rng = trial_rng(s.seed, trial)
    sd = math.sqrt(s.variance)
    if s.kind == SourceKind.GAUSSIAN:
        return sd * rng.standard_normal(n)
    if s.kind == SourceKind.LAPLACIAN:
        return rng.laplace(0.0, sd / math.sqrt(2.0), n)
    if s.kind == SourceKind.UNIFORM:
        a = math.sqrt(3.0) * sd
        return rng.uniform(-a, a, n)
    # stationary AR(1): first sample from the marginal, then rho-recursion
    w = sd * rng.standard_normal(n)
    w[1:] *= math.sqrt(1.0 - s.rho**2)
    return lfilter([1.0], [1.0, -s.rho], w)


def generate_blocks(s: SourceSpec, n: int, trials: int) -> np.ndarray:
    """``(n, trials)`` array; column ``t`` equals ``generate_block(s, n, t)``."""
    return np.stack([generate_block(s, n, t) for t in range(trials)], axis=1)


class Codec(enum.Enum):
    CROM = "crom"
    SPARC = "sparc"
    ZERO_RATE = "zero-rate"


@dataclass(frozen=True)
class ExperimentSpec:
    codec: Codec
    n: int
    rate: float = 1.0
    k: int = 1
    M: int = 256
    scheme: Scheme = Scheme.UNIFORM_HAAR
    schedule: codec.Schedule = codec.Schedule.SIMULATION
    gamma: float = 0.0
    sigma2: float | None = None
    alpha: float | None = None
    seed: int = 0
    source: SourceSpec = field(default_factory=SourceSpec)
    trials: int = 100
    rate_grid: tuple[float, ...] | None = None
    # redraw the transform sequence / codebook for every trial (slow for
    # dense matrices); by default one seeded sequence serves all trials
    fresh_transforms: bool = False

    def __post_init__(self):
        object.__setattr__(self, "codec", Codec(self.codec))
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if self.trials < 1:
            raise ConfigurationError(f"trials must be at least 1, got {self.trials}")
        if self.codec == Codec.ZERO_RATE:
            object.__setattr__(self, "rate", ZeroRateCode(self.n, self.k, self.alpha).rate)
        grid = self.rate_grid
        if grid is None and self.codec == Codec.ZERO_RATE:
            grid = (0.0, self.rate)
        elif grid is None:
            grid = tuple(self.rate * f for f in (0.0, 0.25, 0.5, 0.75, 1.0))
        grid = tuple(float(r) for r in grid)
        if any(not 0.0 <= r <= self.rate * (1 + 1e-12) for r in grid):
            raise ConfigurationError(f"rate grid {grid} must lie within [0, {self.rate}]")
        object.__setattr__(self, "rate_grid", grid)

    @property
    def codec_sigma2(self) -> float:
        return self.source.variance if self.sigma2 is None else self.sigma2


def _crom_params(e: ExperimentSpec, seed: int) -> codec.CromParams:
    return codec.CromParams.create(e.n, e.k, e.rate, e.scheme, seed=seed, sigma2=e.codec_sigma2,
                                   gamma=e.gamma, schedule=e.schedule)


def _sparc_params(e: ExperimentSpec, seed: int) -> sparc.SparcParams:
    return sparc.SparcParams.for_rate(e.n, e.M, e.rate, seed=seed, sigma2=e.codec_sigma2)


def _derived_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)).generate_state(1, np.uint64)[0])


def distortion_matrix(e: ExperimentSpec, X: np.ndarray) -> tuple[np.ndarray, float]:
    """Per-stage, per-trial distortions ``(stages + 1, T)`` and nats per stage."""
    if e.codec == Codec.ZERO_RATE:
        zr = ZeroRateCode(e.n, e.k, e.alpha)
        out = np.empty((2, X.shape[1]))
        for t in range(X.shape[1]):
            x = X[:, t]
            out[0, t] = np.dot(x, x) / e.n
            d = x - zr_decode(zr_encode(x, zr), zr)
            out[1, t] = np.dot(d, d) / e.n
        return out, zr.rate
    mod, make = (codec, _crom_params) if e.codec == Codec.CROM else (sparc, _sparc_params)
    if not e.fresh_transforms:
        p = make(e, e.seed)
        idx, _ = mod.encode_columns(X, p)
        return mod.trace_columns(X, idx, p), p.step_rate
    cols = []
    for t in range(X.shape[1]):
        p = make(e, _derived_seed(e.seed, t))
        x = X[:, t:t + 1]
        idx, _ = mod.encode_columns(x, p)
        cols.append(mod.trace_columns(x, idx, p))
    return np.concatenate(cols, axis=1), p.step_rate


def stage_for_rate(rate: float, step: float, stages: int) -> int:
    """Last stage whose cumulative rate does not exceed ``rate``."""
    return min(stages, int(math.floor(rate / step * (1 + 1e-12) + 1e-12)))


def _mean_std(v: np.ndarray) -> tuple[float, float]:
    # fsum is exact, so the result does not depend on summation order
    m = math.fsum(v.tolist()) / v.size
    if v.size < 2:
        return m, 0.0
    return m, math.sqrt(math.fsum(((v - m) ** 2).tolist()) / (v.size - 1))


def run_experiment(e: ExperimentSpec) -> list[dict]:
    X = generate_blocks(e.source, e.n, e.trials)
    D, step = distortion_matrix(e, X)
    stages = D.shape[0] - 1
    sigma2 = e.source.variance
    k_col = e.k if e.codec != Codec.SPARC else ""
    m_col = e.M if e.codec == Codec.SPARC else ""
    scheme = e.scheme.name.lower() if e.codec == Codec.CROM else ""
    rows = []
    for r in e.rate_grid:
        i = stage_for_rate(r, step, stages)
        mean, std = _mean_std(D[i])
        rows.append(dict(codec=e.codec.value, n=e.n, k=k_col, M=m_col, scheme=scheme,
                         source=e.source.label, rate_nats=r, stage=i, stage_rate=i * step,
                         mean_distortion=mean, std_distortion=std, trials=e.trials,
                         d_gaussian=gaussian_distortion_rate(r, sigma2)))
    for r in e.rate_grid:
        dg = gaussian_distortion_rate(r, sigma2)
        rows.append(dict(codec="reference", n=e.n, k="", M="", scheme="", source=e.source.label,
                         rate_nats=r, stage="", stage_rate=r, mean_distortion=dg,
                         std_distortion=0.0, trials=0, d_gaussian=dg))
    return rows


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def write_csv(rows: Sequence[dict], out=None) -> str:
    """Serialise rows (schema line first); returns the text and writes it to
    ``out`` if given."""
    buf = io.StringIO()
    buf.write(CSV_VERSION + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for row in rows:
        w.writerow([_fmt(row[f]) for f in CSV_FIELDS])
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


def read_csv(text: str) -> list[dict]:
    lines = text.splitlines()
    if not lines or lines[0] != CSV_VERSION:
        raise ValueError("missing curve schema line")
    return list(csv.DictReader(lines[1:]))
