"""One test per acceptance criterion.

Each test records a PASS/FAIL line via ``acceptance_report``; the lines are
printed in a summary section at the end of the pytest run.  Monte Carlo
curves are memoised by the ``curve`` fixture so criteria that share a
configuration only pay for it once.
"""
import itertools
import math
import time

import numpy as np
from crom.channel import ChannelCode, error_rate
from crom.codec import CromParams, Schedule, crom_encode, decode_prefix
from crom.codec_io import HEADER_SIZE, rank_width, read_stream, subset_rank, subset_unrank, write_stream
from crom.harness import ExperimentSpec, SourceKind, SourceSpec, generate_block
from crom.stats import order_stat_lower_quantile
from crom.topk import IndexMessage
from crom.transform import Scheme, build_sequence
from crom.zero_rate import ZeroRateCode, zr_decode, zr_encode

GRID = (0.25, 0.5, 0.75, 1.0)
TRIALS = 100


def crom_spec(n, k=1, scheme="haar", source=None):
    return ExperimentSpec("crom", n=n, k=k, rate=1.0, scheme=scheme, trials=TRIALS, rate_grid=GRID,
                          source=source or SourceSpec(seed=1), seed=1)


def means(rows):
    return {r: rows[r]["mean_distortion"] for r in GRID}


def fmt(d):
    return " ".join(f"{r}:{v:.4f}" for r, v in d.items())


def test_c01_residual_identity(acceptance_report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    configs = [(n, k, sched, scheme) for n in (64, 256) for k in (1, 3)
               for sched in Schedule for scheme in Scheme]
    for c in range(50):
        n, k, sched, scheme = configs[c % len(configs)]
        rate = float(rng.uniform(0.4, 1.2))
        L = int(n * rate / math.log(math.comb(n, k)))
        gamma = 0.5 * math.exp(-2 * rate) if sched == Schedule.THEOREM else 0.0
        p = CromParams.create(n, k, rate, scheme, seed=int(rng.integers(2**62)),
                              sigma2=1.0, schedule=sched, gamma=gamma)
        assert p.L == L
        x = rng.standard_normal(n)
        ts = build_sequence(p.scheme, p.L + 1)
        enc = crom_encode(x, p, ts)
        for i in range(p.L + 1):
            xhat = decode_prefix(enc.messages[:i], p, ts)
            lhs = np.sum((x - xhat) ** 2) / n
            rhs = enc.residual_norms[i] ** 2 / n
            worst = max(worst, abs(lhs - rhs) / rhs)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 30
    acceptance_report(1, ok, f"max rel err {worst:.2e}, {elapsed:.1f}s")
    assert worst <= 1e-9
    assert elapsed < 30


def test_c02_distortion_rate_band(curve, acceptance_report):
    t0 = time.perf_counter()
    m = means(curve(crom_spec(1024)))
    elapsed = time.perf_counter() - t0
    ok = all(math.exp(-2 * r) <= v <= math.exp(-2 * r) + 0.15 for r, v in m.items()) and elapsed < 600
    acceptance_report(2, ok, f"{fmt(m)}, {elapsed:.1f}s")
    for r, v in m.items():
        assert math.exp(-2 * r) <= v <= math.exp(-2 * r) + 0.15
    assert elapsed < 600


def test_c03_crom_matches_sparc(curve, acceptance_report):
    t0 = time.perf_counter()
    c = means(curve(crom_spec(256)))
    s = means(curve(ExperimentSpec("sparc", n=256, M=256, rate=1.0, trials=TRIALS, rate_grid=GRID,
                                   source=SourceSpec(seed=1), seed=1)))
    elapsed = time.perf_counter() - t0
    diff = {r: abs(c[r] - s[r]) for r in GRID}
    ok = max(diff.values()) <= 0.05 and elapsed < 600
    acceptance_report(3, ok, f"|diff| {fmt(diff)}, {elapsed:.1f}s")
    assert max(diff.values()) <= 0.05
    assert elapsed < 600


def test_c04_k_ordering(curve, acceptance_report):
    t0 = time.perf_counter()
    d = {k: means(curve(crom_spec(1024, k=k))) for k in (1, 3, 5)}
    elapsed = time.perf_counter() - t0
    rates = [r for r in GRID if r >= 0.5]
    ok = all(d[1][r] <= d[3][r] + 0.02 and d[3][r] <= d[5][r] + 0.02 for r in rates) and elapsed < 900
    detail = "; ".join(f"r={r}: {d[1][r]:.4f} {d[3][r]:.4f} {d[5][r]:.4f}" for r in rates)
    acceptance_report(4, ok, f"{detail}, {elapsed:.1f}s")
    for r in rates:
        assert d[1][r] <= d[3][r] + 0.02
        assert d[3][r] <= d[5][r] + 0.02
    assert elapsed < 900


def test_c05_structured_transforms(curve, acceptance_report):
    t0 = time.perf_counter()
    haar = means(curve(crom_spec(1024)))
    gd = means(curve(crom_spec(1024, scheme="givens-dct")))
    g = means(curve(crom_spec(1024, scheme="givens")))
    elapsed = time.perf_counter() - t0
    close = max(abs(gd[r] - haar[r]) for r in GRID)
    margin = g[1.0] - max(haar[1.0], gd[1.0])
    ok = close <= 0.03 and margin > 0 and elapsed < 600
    acceptance_report(5, ok, f"max |givens-dct - haar| {close:.4f}, givens margin at R=1 {margin:.4f}, "
                             f"{elapsed:.1f}s")
    assert close <= 0.03
    assert margin > 0
    assert elapsed < 600


def test_c06_zero_rate_gain(acceptance_report):
    t0 = time.perf_counter()
    n, trials = 2**14, 200
    code = ZeroRateCode(n, 1)
    source = SourceSpec(seed=6)
    scaled = []
    for t in range(trials):
        x = generate_block(source, n, t)
        xhat = zr_decode(zr_encode(x, code), code)
        g = (x @ x - np.sum((x - xhat) ** 2)) / n
        scaled.append(n * g / (2 * math.log(n)))
    value = math.fsum(scaled) / trials
    elapsed = time.perf_counter() - t0
    ok = 0.8 <= value <= 1.1 and elapsed < 60
    acceptance_report(6, ok, f"mean(n g)/(2 ln n) = {value:.4f} with alpha={code.alpha:.4f}, {elapsed:.1f}s")
    assert 0.8 <= value <= 1.1
    assert elapsed < 60


def _order_stat_violations(n, i, eps, trials, rng):
    t = order_stat_lower_quantile(n, i, eps)
    hits = 0
    for _ in range(trials // 1000):
        z = rng.standard_normal((1000, n))
        hits += int(np.count_nonzero(np.partition(z, n - i, axis=1)[:, n - i] < t))
    return hits / trials


def _max_tail_violations(n, trials, rng):
    thr = math.sqrt(2 * math.log(n))
    hits = 0
    for _ in range(trials // 500):
        hits += int(np.count_nonzero(rng.standard_normal((500, n)).max(axis=1) > thr))
    return hits / trials


def test_c07_order_statistic_oracles(acceptance_report):
    t0 = time.perf_counter()
    trials = 20000
    rng = np.random.default_rng(7)
    checks = []
    for n, i, eps in [(1000, 1, 0.1), (1000, 3, 0.1), (200, 2, 0.05)]:
        f = _order_stat_violations(n, i, eps, trials, rng)
        checks.append((f"order-stat(n={n},i={i},eps={eps})", f, eps + 3 * math.sqrt(eps / trials)))
    for n in (1000, 10000):
        b = 1 / math.sqrt(math.log(n))
        checks.append((f"max-tail(n={n})", _max_tail_violations(n, trials, rng), b + 3 * math.sqrt(b / trials)))
    elapsed = time.perf_counter() - t0
    ok = all(f <= b for _, f, b in checks) and elapsed < 120
    acceptance_report(7, ok, ", ".join(f"{name} {f:.4f}<={b:.4f}" for name, f, b in checks)
                      + f", {elapsed:.1f}s")
    for name, f, b in checks:
        assert f <= b, name
    assert elapsed < 120


def test_c08_rateless_stream(acceptance_report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    cases = partial = 0
    while cases < 20:
        n = int(rng.choice([8, 16, 32, 64, 128, 256, 512]))
        k = int(rng.integers(1, min(4, n // 2) + 1))
        scheme = Scheme(int(rng.integers(3)))
        if scheme == Scheme.UNIFORM_HAAR and n > 256:
            continue
        lc = math.log(math.comb(n, k))
        target_L = int(rng.integers(1, 65))
        p = CromParams.create(n, k, (target_L + 0.5) * lc / n, scheme, seed=int(rng.integers(2**62)))
        assert 1 <= p.L <= 64
        ts = build_sequence(p.scheme, p.L + 1)
        enc = crom_encode(rng.standard_normal(n), p, ts)
        data = write_stream(enc)
        w = rank_width(n, k)
        for i in range(p.L + 1):
            # shortest byte prefix that holds message i; with w < 8 it may hold a few more
            cut = data[: HEADER_SIZE + math.ceil(w * i / 8)]
            got = read_stream(cut)
            expect = min(p.L, 8 * math.ceil(w * i / 8) // w)
            assert len(got.messages) == expect >= i
            assert got.messages == list(enc.messages[:expect])
            assert np.array_equal(decode_prefix(got.messages, got.params, ts),
                                  decode_prefix(enc.messages[:expect], p, ts))
            assert np.array_equal(decode_prefix(read_stream(cut, max_messages=i).messages, p, ts),
                                  decode_prefix(enc.messages[:i], p, ts))
            nbytes = w * i // 8 + 1
            if i < p.L and w * i < 8 * nbytes < w * (i + 1):
                # cut inside message i+1: exactly that partial message is dropped
                part = read_stream(data[: HEADER_SIZE + nbytes])
                partial += 1
                assert part.messages == list(enc.messages[:i])
                assert part.truncated
        cases += 1
    for n in range(2, 13):
        for k in range(1, n):
            subsets = sorted(itertools.combinations(range(n), k), key=lambda c: c[::-1])
            for r, c in enumerate(subsets):
                assert subset_rank(IndexMessage(c, n)) == r
                assert subset_unrank(r, n, k).indices == c
    elapsed = time.perf_counter() - t0
    acceptance_report(8, elapsed < 60, f"{cases} random streams, {partial} partial cuts, exhaustive rank n<=12, {elapsed:.1f}s")
    assert elapsed < 60


def test_c09_channel_dual(acceptance_report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    ns = (256, 1024, 4096)
    pe = {n: error_rate(ChannelCode(n), 4000, rng) for n in ns}
    ratio = ChannelCode(2**16).capacity_ratio
    elapsed = time.perf_counter() - t0
    decreasing = all(pe[b] <= pe[a] + 0.03 for a, b in zip(ns, ns[1:]))
    ok = decreasing and pe[4096] <= 0.5 and 0.8 <= ratio <= 1.2 and elapsed < 120
    acceptance_report(9, ok, "P_e " + " ".join(f"{n}:{v:.4f}" for n, v in pe.items())
                      + f", R_n/C(P_n) at 2^16 = {ratio:.4f}, {elapsed:.1f}s")
    assert decreasing
    assert pe[4096] <= 0.5
    assert elapsed < 120
    assert 0.8 <= ratio <= 1.2


def test_c10_gauss_markov_band(curve, acceptance_report):
    t0 = time.perf_counter()
    m = means(curve(crom_spec(1024, source=SourceSpec(SourceKind.GAUSS_MARKOV, 1.0, 0.9, seed=10))))
    elapsed = time.perf_counter() - t0
    ok = all(math.exp(-2 * r) <= v <= math.exp(-2 * r) + 0.2 for r, v in m.items()) and elapsed < 600
    acceptance_report(10, ok, f"{fmt(m)}, {elapsed:.1f}s")
    for r, v in m.items():
        assert math.exp(-2 * r) <= v <= math.exp(-2 * r) + 0.2
    assert elapsed < 600
