import math

import numpy as np
import pytest

from crom.errors import ConfigurationError
from crom.stats import expected_order_statistic, q_inv
from crom.topk import IndexMessage
from crom.zero_rate import ZeroRateCode, default_k, zr_decode, zr_encode

# (quantile_{1-eps}(d) - base) * n / (k lnln n), from one brute-force run of
# 20000 blocks at n in {1024, 4096}, k in {1, 3}: 2.32 .. 2.41
CALIBRATED_C = 2.5


def test_encode_examples():
    code = ZeroRateCode(4, 1, alpha=1.0)
    assert zr_encode([0.1, 5.0, -2.0, 0.3], code).indices == (1,)
    x = np.random.default_rng(0).standard_normal(4)
    assert zr_encode(x, code).indices == (int(np.argmax(x)),)
    assert code.rate == pytest.approx(math.log(4) / 4, rel=1e-14)


def test_decode_example():
    a = 1.7
    out = zr_decode(IndexMessage((1,), 4), ZeroRateCode(4, 1, alpha=a))
    assert np.allclose(out, [-a / 3, a, -a / 3, -a / 3], atol=1e-15)


def test_decode_zero_sum():
    rng = np.random.default_rng(1)
    for _ in range(100):
        n = int(rng.integers(3, 300))
        k = int(rng.integers(1, min(n, 8)))
        idx = tuple(sorted(rng.choice(n, k, replace=False).tolist()))
        xhat = zr_decode(IndexMessage(idx, n), ZeroRateCode(n, k, alpha=float(rng.uniform(0.1, 5))))
        assert abs(xhat.mean()) <= 1e-12


def test_default_alpha_and_k():
    code = ZeroRateCode(1024)
    assert code.k == 1 and code.alpha == pytest.approx(2.3725033685000542, rel=1e-10)
    assert default_k(1024, 0.0) == 1
    assert default_k(1024, 1.0) == math.ceil(math.log(1024))


def test_rejects_bad_config():
    with pytest.raises(ConfigurationError):
        ZeroRateCode(4, 4)
    with pytest.raises(ConfigurationError):
        ZeroRateCode(16, 1, alpha=-1.0)
    with pytest.raises(ValueError):
        zr_encode(np.ones(5), ZeroRateCode(4, 1, 1.0))
    with pytest.raises(ValueError):
        zr_decode(IndexMessage((0, 1), 4), ZeroRateCode(4, 1, 1.0))


def test_decomposition_identity():
    rng = np.random.default_rng(2)
    for _ in range(50):
        n = int(rng.integers(8, 2000))
        k = int(rng.integers(1, 6))
        code = ZeroRateCode(n, k, alpha=float(rng.uniform(0.5, 4)))
        x = rng.standard_normal(n) * rng.uniform(0.5, 2)
        xhat = zr_decode(zr_encode(x, code), code)
        a = code.alpha
        top = np.sort(x)[-k:].sum()
        rhs = (x @ x + 2 * k * a / (n - k) * x.sum() - 2 * n * a / (n - k) * top
               + n * k * a * a / (n - k))
        assert np.sum((x - xhat) ** 2) == pytest.approx(rhs, rel=1e-9)


@pytest.mark.parametrize("n,k", [(4096, 1), (4096, 2)])
def test_excess_distortion_probability(n, k):
    eps = 0.1
    code = ZeroRateCode(n, k)
    bound = (1 - 2 * code.rate + math.sqrt(2 / n) * q_inv(eps)
             + CALIBRATED_C * k * math.log(math.log(n)) / n)
    rng = np.random.default_rng(777 + k)
    trials = 4000
    excess = 0
    for _ in range(trials // 500):
        X = rng.standard_normal((500, n))
        for x in X:
            d = x - zr_decode(zr_encode(x, code), code)
            excess += d @ d / n > bound
    assert excess / trials <= eps + 3 * math.sqrt(eps * (1 - eps) / trials)


def test_expected_value_alpha_beats_proof_alpha():
    n = 4096
    proof, natural = ZeroRateCode(n), ZeroRateCode(n, alpha=expected_order_statistic(n, 1))
    rng = np.random.default_rng(5)
    gains = {id(proof): [], id(natural): []}
    for _ in range(400):
        x = rng.standard_normal(n)
        for code in (proof, natural):
            d = x - zr_decode(zr_encode(x, code), code)
            gains[id(code)].append(x @ x - d @ d)
    assert np.mean(gains[id(natural)]) > np.mean(gains[id(proof)])
