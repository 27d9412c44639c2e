"""Command-line tools: ``jump``, ``bench`` and ``stat``.

Exit codes: 0 success, 1 failure (I/O, bad file, failed test), 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

import numba
import numpy as np

from . import stats
from .engine import ScalarMT19937, VMT19937, VmtConfig
from .gf2 import build_F, mat_pow2
from .jump import JUMP_DIR_ENV, find_jump_matrix, jump_matrix, jump_matrix_filename, production_exponent
from .matrix_file import FormatError, read_checkpoint, write_checkpoint, write_jump_matrix
from .mt import MT19937

log = logging.getLogger("vmt19937")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_BENCH_COUNT = 10**8
DEFAULT_STAT_COUNT = 10**7
DEFAULT_CHECKPOINT_EVERY = 64
# used when the production matrix for a lane count is not on disk
FALLBACK_EXPONENT = 16

CSV_COLUMNS = ("generator", "M", "block", "N", "seconds", "words_per_sec", "checksum")


class UsageError(Exception):
    pass


# -- jump ---------------------------------------------------------------------


def cmd_jump(args) -> int:
    q = args.exponent
    if q < 0:
        raise UsageError("exponent must be non-negative")
    if args.checkpoint_every < 1:
        raise UsageError("--checkpoint-every must be at least 1")
    out = Path(args.out) if args.out else Path(os.environ.get(JUMP_DIR_ENV, ".")) / jump_matrix_filename(q)
    ckpt_path = Path(args.checkpoint) if args.checkpoint else out.with_name(out.name + ".ckpt")

    if args.resume:
        ckpt = read_checkpoint(args.resume)
        if ckpt.matrix.dim != MT19937.effective_dim:
            raise FormatError(f"{args.resume}: dimension {ckpt.matrix.dim}, expected {MT19937.effective_dim}")
        if ckpt.exponent != q:
            raise FormatError(f"{args.resume}: checkpoint targets q={ckpt.exponent}, requested q={q}")
        base, done = ckpt.matrix, ckpt.completed
        log.info("resuming from %s at squaring %d of %d", args.resume, done, q)
    else:
        base, done = build_F(), 0

    parallel = numba.config.NUMBA_NUM_THREADS > 1
    started = time.perf_counter()

    def progress(completed, matrix):
        if completed % args.checkpoint_every == 0 and completed < q:
            write_checkpoint(ckpt_path, matrix, q, completed)
            log.info("squaring %d/%d (%.1fs), checkpoint %s", completed, q, time.perf_counter() - started, ckpt_path)
        else:
            log.info("squaring %d/%d (%.1fs)", completed, q, time.perf_counter() - started)

    result = mat_pow2(base, q - done, progress, start=done, parallel=parallel)
    write_jump_matrix(out, result, q)
    if ckpt_path.exists() and not args.resume:
        ckpt_path.unlink()
    log.info("wrote F^(2^%d) to %s", q, out)
    print(out)
    return EXIT_OK


# -- bench --------------------------------------------------------------------

_BLOCK_MODES = {"1": "single", "16": "block16", "state": "state"}


def _resolve_exponent(lanes: int) -> tuple[int, object]:
    """Production jump matrix if available on disk, else a small stand-in."""
    if lanes == 1:
        return production_exponent(1), None
    q = production_exponent(lanes)
    found = find_jump_matrix(q)
    if found is not None:
        return q, found
    log.warning(
        "no precomputed F^(2^%d) in $%s; de-phasing lanes by 2^%d instead (throughput is unaffected)",
        q, JUMP_DIR_ENV, FALLBACK_EXPONENT,
    )
    return FALLBACK_EXPONENT, _fallback_matrix()


_fallback_cache: dict = {}


def _fallback_matrix():
    if "m" not in _fallback_cache:
        _fallback_cache["m"] = jump_matrix(FALLBACK_EXPONENT)
    return _fallback_cache["m"]


def make_generator(seed: int, lanes: int, backend: str = "numba") -> VMT19937:
    q, B = _resolve_exponent(lanes)
    return VMT19937(seed, VmtConfig(lanes=lanes, exponent=q), B, backend=backend)


def disjoint_exponent(per_lane: int) -> int:
    """Smallest exponent (at least the fallback) with ``2**q >= per_lane``."""
    return max(FALLBACK_EXPONENT, (max(per_lane, 1) - 1).bit_length())


def make_stat_generator(seed: int, lanes: int, count: int) -> VMT19937:
    """Generator whose lanes cannot overlap within ``count`` total draws.

    The short fallback jump is fine for timing but would make lanes replay
    each other's values, which the statistics would (rightly) flag.
    """
    q = production_exponent(lanes)
    B = find_jump_matrix(q) if lanes > 1 else None
    if lanes > 1 and B is None:
        q = disjoint_exponent(-(-count // lanes))
        B = find_jump_matrix(q)
        if B is None:
            log.warning(
                "no precomputed jump matrix; computing F^(2^%d) so %d lanes stay disjoint "
                "(store it with `vmt19937 jump -q %d` in $%s to skip this)",
                q, lanes, q, JUMP_DIR_ENV,
            )
            B = jump_matrix(q)
    return VMT19937(seed, VmtConfig(lanes=lanes, exponent=q), B)


def run_bench(generator: str, lanes: int, block: str, count: int, seed: int) -> dict:
    """One timed run; compilation and de-phasing happen before the clock starts."""
    if generator == "scalar":
        ScalarMT19937(seed).checksum(1)  # compile outside the timed region
        gen = ScalarMT19937(seed)
        started = time.perf_counter()
        checksum = gen.checksum(count)
    else:
        mode = _BLOCK_MODES[block]
        warm = make_generator(seed, lanes)
        warm.checksum(warm.state_words, mode)
        gen = make_generator(seed, lanes)
        started = time.perf_counter()
        checksum = gen.checksum(count, mode)
    seconds = time.perf_counter() - started
    return {
        "generator": generator,
        "M": lanes,
        "block": block if generator == "vmt" else "1",
        "block_words": {"1": 1, "16": 16, "state": MT19937.n * lanes}[block],
        "N": count,
        "seconds": seconds,
        "words_per_sec": count / seconds if seconds > 0 else float("inf"),
        "checksum": f"{checksum:08x}",
    }


def cmd_bench(args) -> int:
    if args.count < 0:
        raise UsageError("count must be non-negative")
    if args.generator == "scalar":
        if args.lanes != [1]:
            raise UsageError("--lanes only applies to --generator vmt")
        if args.block != ["1"]:
            raise UsageError("--block only applies to --generator vmt")
    rows = [
        run_bench(args.generator, lanes, block, args.count, args.seed)
        for lanes in args.lanes
        for block in args.block
    ]
    if args.format == "csv":
        print(",".join(CSV_COLUMNS))
        for r in rows:
            print(",".join(_fmt(r[c]) for c in CSV_COLUMNS))
    else:
        print(f"{'generator':<10}{'M':>4}{'block':>8}{'N':>13}{'seconds':>10}{'Mwords/s':>11}  checksum")
        for r in rows:
            block = f"{r['block']}({r['block_words']})" if r["block"] == "state" else r["block"]
            print(
                f"{r['generator']:<10}{r['M']:>4}{block:>8}{r['N']:>13}{r['seconds']:>10.3f}"
                f"{r['words_per_sec'] / 1e6:>11.1f}  {r['checksum']}"
            )
    return EXIT_OK


def _fmt(v) -> str:
    return f"{v:.6f}" if isinstance(v, float) else str(v)


# -- stat ---------------------------------------------------------------------


def cmd_stat(args) -> int:
    names = [t.strip() for t in args.tests.split(",") if t.strip()]
    unknown = [t for t in names if t not in stats.TESTS]
    if unknown or not names:
        raise UsageError(f"unknown test(s) {unknown or names}; choose from {sorted(stats.TESTS)}")
    if "xcorr" in names and args.lanes < 2 and args.source == "vmt":
        raise UsageError("xcorr needs --lanes >= 2")

    n = args.count
    if args.source == "constant":
        words = np.full(n, 0xA5A5A5A5, dtype=np.uint32)
    else:
        words = make_stat_generator(args.seed, args.lanes, n).generate(n, "block16")
    lanes = max(args.lanes, 2) if args.source == "constant" else args.lanes

    reports = []
    try:
        for name in names:
            if name == "xcorr":
                per_lane = n // lanes
                lane_streams = [words[: per_lane * lanes].reshape(per_lane, lanes)[:, t] for t in range(lanes)]
                reports.append(stats.lane_cross_correlation(lane_streams, per_lane))
            else:
                reports.append(stats.TESTS[name](words, n))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for r in reports:
        print(r)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


# -- entry point --------------------------------------------------------------


def _block(value: str) -> str:
    if value not in _BLOCK_MODES:
        raise argparse.ArgumentTypeError(f"block must be 1, 16 or state, got {value!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vmt19937", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("jump", help="compute the jump matrix F^(2^q)")
    p.add_argument("-q", "--exponent", type=int, required=True)
    p.add_argument("-o", "--out", help="output file (default: $VMT_JUMP_DIR/jump_q<q>.vmtj)")
    p.add_argument("--checkpoint-every", type=int, default=DEFAULT_CHECKPOINT_EVERY, metavar="K")
    p.add_argument("--checkpoint", help="checkpoint path (default: <out>.ckpt)")
    p.add_argument("--resume", help="continue from this checkpoint file")
    p.set_defaults(func=cmd_jump)

    p = sub.add_parser("bench", help="time generation of N words")
    p.add_argument("--generator", choices=("scalar", "vmt"), default="vmt")
    p.add_argument("--lanes", type=int, nargs="+", default=[1], choices=(1, 2, 4, 8, 16))
    p.add_argument("--block", type=_block, nargs="+", default=["1"])
    p.add_argument("-n", "--count", type=int, default=DEFAULT_BENCH_COUNT)
    p.add_argument("--seed", type=int, default=5489)
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("stat", help="run statistical smoke tests")
    p.add_argument("--lanes", type=int, default=4, choices=(1, 2, 4, 8, 16))
    p.add_argument("-n", "--count", type=int, default=DEFAULT_STAT_COUNT)
    p.add_argument("--tests", default="monobit,chi2,xcorr", help="comma list of: " + ",".join(stats.TESTS))
    p.add_argument("--seed", type=int, default=5489)
    p.add_argument("--source", choices=("vmt", "constant"), default="vmt", help="'constant' is a self-test that must fail")
    p.set_defaults(func=cmd_stat)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose or args.command == "jump" else logging.WARNING,
        format="%(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"vmt19937 {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, FormatError) as exc:
        print(f"vmt19937 {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
