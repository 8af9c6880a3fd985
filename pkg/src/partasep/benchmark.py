"""Timing comparison of the compiled and pure-numpy trajectory kernels.

Run as ``python -m partasep.benchmark``.  Both backends are driven with
identical seeds, so besides the timing this doubles as a smoke test that
they produce the same final state.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import _kernels_py
from .dynamics import KernelParams, RandomSource


def _load_compiled():
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


def _run(impl, params: KernelParams, L: int, steps: int, seed: int) -> tuple[float, np.ndarray]:
    thr_move, thr_block, block_only = params.kernel_args()
    gen = RandomSource(seed).generator()
    bits = np.zeros(2 * L, dtype=np.uint8)
    bits[0::2] = 1
    start = time.perf_counter()
    impl.evolve(bits, steps, thr_move, thr_block, block_only, gen.bit_generator)
    return time.perf_counter() - start, bits


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="partasep.benchmark")
    parser.add_argument("--L", type=int, default=500)
    parser.add_argument("--steps", type=int, default=20_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    compiled = _load_compiled()
    cases = [
        ("p=0.5 eps=0.1", KernelParams(p=0.5, epsilon=0.1)),
        ("p=1.0 eps=0.1", KernelParams(p=1.0, epsilon=0.1)),
    ]
    for label, params in cases:
        py_time, py_bits = _run(_kernels_py, params, args.L, args.steps, args.seed)
        py_rate = args.steps / py_time
        print(f"{label}  python:   {py_rate:12.0f} steps/s")
        if compiled is None:
            print(f"{label}  compiled: not built")
            continue
        c_time, c_bits = _run(compiled, params, args.L, args.steps, args.seed)
        c_rate = args.steps / c_time
        agree = "ok" if np.array_equal(py_bits, c_bits) else "MISMATCH"
        print(f"{label}  compiled: {c_rate:12.0f} steps/s "
              f"(x{c_rate / py_rate:.1f}, final state {agree})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
