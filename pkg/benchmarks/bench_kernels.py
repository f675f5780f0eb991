"""Compare the numba kernels with the pure-numpy fallback.

Kernel timings call each backend explicitly in one process.  The end-to-end
timings run a desk-preset OT in a fresh interpreter per backend, selected
through ``MINIQOT_BACKEND``, so the ZK engine is covered as well.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--skip-e2e]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from miniqot import bits as B
from miniqot._backend import NUMBA_AVAILABLE
from miniqot.circuit import eval_circuit, random_circuit
from miniqot.prg import arx_block, cf_expand_words, cf_prg_circuit

BACKENDS = ("numba", "numpy")


def best_of(fn, repeat: int) -> float:
    fn()  # warm-up, includes JIT compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(rng):
    big = random_circuit(rng, 16, 20_000, 8)
    xs_big = B.random_bits(rng, 4096 * 16).reshape(4096, 16)
    prg = cf_prg_circuit(8, 24)
    xs_prg = B.words_to_bits(np.arange(256), 8)
    words = [rng.integers(0, 1 << 16, 200_000, dtype=np.uint64) for _ in range(4)]
    seeds = np.arange(1 << 16, dtype=np.uint64)
    return {
        "eval_circuit 20k gates x 4096 lanes": lambda b: eval_circuit(big, xs_big, backend=b),
        "eval_circuit PRG circuit x 256 seeds": lambda b: eval_circuit(prg, xs_prg, backend=b),
        "arx_block 200k blocks (w=16)": lambda b: arx_block(*words, 16, backend=b),
        "cf_expand_words 65536 seeds -> 48 bits": lambda b: cf_expand_words(seeds, 48, 16, backend=b),
    }


def end_to_end(backend: str, mode: str, seed: int) -> float:
    env = dict(os.environ, MINIQOT_BACKEND=backend)
    cmd = [sys.executable, "-m", "miniqot", "--preset", "desk", "--mode", mode, "--seed", str(seed),
           "--secrets", "a5f0,0ff0", "--choice", "1"]
    subprocess.run(cmd, env=env, check=True, capture_output=True)  # populate the JIT cache
    t0 = time.perf_counter()
    subprocess.run(cmd, env=env, check=True, capture_output=True)
    return time.perf_counter() - t0


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--skip-e2e", action="store_true", help="only time the kernels")
    args = p.parse_args(argv)
    if not NUMBA_AVAILABLE:
        print("numba is not available (or MINIQOT_BACKEND=numpy); nothing to compare", file=sys.stderr)
        return 1

    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<42} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for name, fn in kernel_cases(rng).items():
        ref = np.asarray(fn("numpy"))
        assert np.array_equal(np.asarray(fn("numba")), ref), f"backends disagree on {name}"
        t = {b: best_of(lambda: fn(b), args.repeat) for b in BACKENDS}
        print(f"{name:<42} {t['numba'] * 1e3:>8.2f}ms {t['numpy'] * 1e3:>8.2f}ms {t['numpy'] / t['numba']:>7.1f}x")

    if not args.skip_e2e:
        print()
        print(f"{'desk-preset OT (wall clock)':<42} {'numba':>10} {'numpy':>10} {'speedup':>8}")
        for mode in ("hybrid", "full"):
            t = {b: end_to_end(b, mode, args.seed) for b in BACKENDS}
            print(f"{mode:<42} {t['numba']:>9.2f}s {t['numpy']:>9.2f}s {t['numpy'] / t['numba']:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
