"""Benchmark the compiled kernels against the pure-Python fallback,
and measure parallel search scaling.

    python3 benchmarks/bench_kernels.py            # kernel comparison
    python3 benchmarks/bench_kernels.py --search   # end-to-end scaling sweep
    python3 benchmarks/bench_kernels.py --search --bank-mb 100 --query-kb 50
"""

from __future__ import annotations

import argparse
import statistics
import tempfile
import time
from pathlib import Path

import numpy as np

from genoogle import Engine, EngineConfig, SearchParams, SpacedSeedMask, fragment_bank
from genoogle.kernels import _pure

try:
    from genoogle.kernels import _core
except ImportError:
    _core = None


def timeit(fn, repeats=5):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def bench_kernels():
    if _core is None:
        print("compiled kernels are not built; showing pure timings only")
    rng = np.random.default_rng(1)
    codes_a = rng.integers(0, 4, 2000).astype(np.uint8)
    codes_b = rng.integers(0, 4, 2000).astype(np.uint8)
    long_codes = rng.integers(0, 4, 2_000_000).astype(np.uint8)
    mask_pos = np.array([0, 1, 2, 4, 7, 10, 12, 15, 16, 17], dtype=np.int32)

    cases = {
        "window_values (2 Mb, step 1)": lambda k: k.window_values(
            long_codes, mask_pos, 18, 1
        ),
        "xdrop_extend (2 Mb walk)": lambda k: k.xdrop_extend(
            long_codes, long_codes, 1_000_000, 1_000_018, 1_000_000, 1_000_018,
            1, -3, 20,
        ),
        "sw_local (2000x2000, band 16)": lambda k: k.sw_local(
            codes_a, codes_b, 1, -3, -5, 16
        ),
        "sw_global (2000x2000, band 16)": lambda k: k.sw_global(
            codes_a, codes_b, 1, -3, -5, 16
        ),
    }
    print(f"{'kernel':38} {'pure (ms)':>12} {'compiled (ms)':>14} {'speedup':>9}")
    for name, fn in cases.items():
        pure_t = timeit(lambda: fn(_pure)) * 1e3
        if _core is not None:
            core_t = timeit(lambda: fn(_core)) * 1e3
            print(f"{name:38} {pure_t:12.2f} {core_t:14.2f} {pure_t / core_t:8.1f}x")
        else:
            print(f"{name:38} {pure_t:12.2f} {'-':>14} {'-':>9}")


def random_dna(rng, n):
    return np.frombuffer(b"ACGT", dtype=np.uint8)[
        rng.integers(0, 4, n, dtype=np.uint8)
    ].tobytes().decode()


BLOCK = 50_000
BLOCKS_PER_SEQ = 8


def build_search_workload(workdir: Path, bank_mb: int, query_kb: int, fragments: int):
    """Bank sequences share 50 kb blocks from a small pool, so a query
    assembled from the pool hits many sequences with long alignments:
    the extend/align stages dominate the runtime."""
    rng = np.random.default_rng(7)
    pool = [random_dna(rng, BLOCK) for _ in range(100)]
    n_seqs = max(1, (bank_mb * 1_000_000) // (BLOCKS_PER_SEQ * BLOCK))
    fasta = workdir / "bank.fa"
    with open(fasta, "w") as fh:
        for i in range(n_seqs):
            picks = rng.integers(0, len(pool), BLOCKS_PER_SEQ)
            fh.write(f">seq{i}\n")
            fh.write("".join(pool[int(p)] for p in picks))
            fh.write("\n")
    print(f"bank: {n_seqs} sequences, ~{bank_mb} MB; formatting...")
    t0 = time.perf_counter()
    fs = fragment_bank(
        fasta, fragments, SpacedSeedMask("111010010100110111"), workdir / "banks",
        "bench",
    )
    print(f"format + index: {time.perf_counter() - t0:.1f}s")
    n_blocks = -(-query_kb * 1000 // BLOCK)
    picks = rng.integers(0, len(pool), n_blocks)
    query = "".join(pool[int(p)] for p in picks)[: query_kb * 1000]
    return Engine.open(fs.manifest_path), query


def search_params() -> SearchParams:
    # min_hsp_length above two window lengths drops single-window chance
    # hits; the long shared-block alignments remain as the work items
    return SearchParams(max_results=0, min_hsp_length=60)


def bench_search(bank_mb: int, query_kb: int, fragments: int, repeats: int):
    with tempfile.TemporaryDirectory() as tmp:
        engine, query = build_search_workload(Path(tmp), bank_mb, query_kb, fragments)
        params = search_params()
        print(f"query: {len(query)} bases; searching ({repeats} runs each)")
        print(f"{'splits':>7} {'workers':>8} {'median (s)':>11} {'speedup':>8}")
        base = None
        for k, w in [(1, 1), (2, 2), (4, 4), (8, 8)]:
            t = timeit(
                lambda: engine.parallel_search(
                    query, params, EngineConfig(query_splits=k, align_workers=w)
                ),
                repeats=repeats,
            )
            if base is None:
                base = t
            print(f"{k:7d} {w:8d} {t:11.3f} {base / t:7.2f}x")
        engine.close()


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--search", action="store_true", help="end-to-end scaling sweep")
    ap.add_argument("--bank-mb", type=int, default=20)
    ap.add_argument("--query-kb", type=int, default=50)
    ap.add_argument("--fragments", type=int, default=1)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    if args.search:
        bench_search(args.bank_mb, args.query_kb, args.fragments, args.repeats)
    else:
        bench_kernels()


if __name__ == "__main__":
    main()
