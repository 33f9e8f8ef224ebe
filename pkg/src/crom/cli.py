"""Command-line entry point: ``crom {encode,decode,simulate,zero-rate,channel}``.

Sample files are raw little-endian float64.  Exit status is 0 on success,
2 for configuration errors and 3 for malformed or corrupt input.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from . import codec_io
from .channel import ChannelCode, error_rate
from .codec import CromParams, crom_encode, decode_prefix, estimate_sigma2
from .errors import ConfigurationError, FormatError
from .harness import ExperimentSpec, SourceSpec, run_experiment, trial_rng, write_csv
from .stats import expected_order_statistic, q_inv
from .zero_rate import ZeroRateCode, default_k, zr_decode, zr_encode

EXIT_CONFIG = 2
EXIT_FORMAT = 3


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def read_samples(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) % 8:
        raise FormatError(f"{path}: size {len(raw)} is not a multiple of 8 bytes")
    return np.frombuffer(raw, dtype="<f8").astype(np.float64)


def write_samples(path: str, x: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(np.asarray(x, dtype="<f8").tobytes())


def cmd_encode(args) -> int:
    x = read_samples(args.input)
    n = args.n or x.size
    if x.size != n:
        raise ConfigurationError(f"input holds {x.size} samples, --n is {n}")
    sigma2 = args.sigma2 if args.sigma2 is not None else estimate_sigma2(x)
    p = CromParams.create(n, args.k, args.rate, args.scheme, seed=args.seed, sigma2=sigma2,
                          gamma=args.gamma, schedule=args.schedule)
    enc = crom_encode(x, p)
    data = codec_io.write_stream(enc)
    with open(args.output, "wb") as fh:
        fh.write(data)
    print(f"n={n} k={p.k} L={p.L} rate={p.L * p.step_rate:.6f} nats/symbol "
          f"bytes={len(data)} residual={enc.final_residual_norm ** 2 / n:.6g}", file=sys.stderr)
    return 0


def cmd_decode(args) -> int:
    with open(args.input, "rb") as fh:
        data = fh.read()
    if args.prefix_bytes is not None:
        data = data[: args.prefix_bytes]
    contents = codec_io.read_stream(data, max_messages=args.prefix_messages)
    xhat = decode_prefix(contents.messages, contents.params)
    write_samples(args.output, xhat)
    note = " (stream truncated)" if contents.truncated else ""
    print(f"decoded {len(contents.messages)} of {contents.params.L} messages{note}", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    source = SourceSpec(args.source, args.variance, args.rho, args.source_seed)
    spec = ExperimentSpec(codec=args.codec, n=args.n, rate=args.rate, k=args.k, M=args.M,
                          scheme=args.scheme, schedule=args.schedule, gamma=args.gamma,
                          sigma2=args.sigma2, seed=args.seed, source=source, trials=args.trials,
                          rate_grid=_floats(args.rates) if args.rates else None,
                          fresh_transforms=args.fresh_transforms)
    rows = run_experiment(spec)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    return 0


def cmd_zero_rate(args) -> int:
    k = args.k or default_k(args.n, args.beta)
    if args.alpha == "expected":
        alpha = expected_order_statistic(args.n, k)
    else:
        alpha = float(args.alpha) if args.alpha else None
    code = ZeroRateCode(args.n, k, alpha)
    threshold = 1 - 2 * code.rate + math.sqrt(2 / args.n) * q_inv(args.eps)
    dist, gain = [], []
    for t in range(args.trials):
        x = trial_rng(args.seed, t).standard_normal(args.n)
        e = x - zr_decode(zr_encode(x, code), code)
        dist.append(float(e @ e) / args.n)
        gain.append(float(x @ x - e @ e))
    mean_d = math.fsum(dist) / args.trials
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "k", "alpha", "rate_nats", "trials", "mean_distortion",
                "gain_ratio", "eps", "threshold", "excess_freq"])
    w.writerow([args.n, k, repr(code.alpha), repr(code.rate), args.trials, repr(mean_d),
                repr(math.fsum(gain) / args.trials / (2 * k * math.log(args.n))), args.eps,
                repr(threshold), repr(sum(d > threshold for d in dist) / args.trials)])
    return 0


def cmd_channel(args) -> int:
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "trials", "error_rate", "P_n", "R_n", "capacity_ratio"])
    for j, n in enumerate(_ints(args.n_grid)):
        code = ChannelCode(n)
        pe = error_rate(code, args.trials, trial_rng(args.seed, j))
        w.writerow([n, args.trials, repr(pe), repr(code.power), repr(code.rate),
                    repr(code.capacity_ratio)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="crom", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def codec_opts(p):
        p.add_argument("--k", type=int, default=1)
        p.add_argument("--rate", type=float, default=1.0, help="nats per symbol")
        p.add_argument("--scheme", default="haar", help="haar | givens | givens-dct")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--sigma2", type=float, default=None)
        p.add_argument("--schedule", default="simulation", choices=["simulation", "theorem"])
        p.add_argument("--gamma", type=float, default=0.0)

    p = sub.add_parser("encode", help="compress one block of float64 samples")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--n", type=int, default=None, help="block length (default: sample count)")
    codec_opts(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="reconstruct from a (possibly truncated) stream")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--prefix-messages", type=int, default=None)
    g.add_argument("--prefix-bytes", type=int, default=None)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("simulate", help="Monte Carlo distortion-rate curve as CSV")
    p.add_argument("--codec", default="crom", choices=["crom", "sparc", "zero-rate"])
    p.add_argument("--n", type=int, required=True)
    codec_opts(p)
    p.add_argument("--M", type=int, default=256, help="SPARC sub-codebook size")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--source", default="gaussian",
                   choices=["gaussian", "laplacian", "uniform", "gauss-markov"])
    p.add_argument("--variance", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--source-seed", type=int, default=0)
    p.add_argument("--rates", default=None, help="comma-separated reporting grid")
    p.add_argument("--fresh-transforms", action="store_true",
                   help="draw a new transform sequence for every trial")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("zero-rate", help="zero-rate scheme statistics")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--beta", type=float, default=0.0, help="k = ceil(ln(n)**beta) when --k is unset")
    p.add_argument("--alpha", default=None, help="float, or 'expected' for E[X_(k)]")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_zero_rate)

    p = sub.add_parser("channel", help="zero-rate AWGN code error rates")
    p.add_argument("--n-grid", default="256,1024,4096")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_channel)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"crom: format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except ConfigurationError as exc:
        print(f"crom: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
