"""Pure-numpy trajectory kernels.

Fallback used when the compiled extension is unavailable.  Both backends
consume random draws in exactly the same order, so trajectories agree
bit for bit:

* normal mode (p < 1): one uniform per engine, in ascending site order,
  compared against the move probability (the slow-bond engine, always the
  last one, uses its own threshold);
* single-coin mode (p = 1): the only uniform drawn per step is the slow
  bond's coin, and only when an engine sits on site 2L.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def _generator(bit_generator) -> np.random.Generator:
    return np.random.Generator(bit_generator)


def _step(bits: np.ndarray, n: int, thr_move: float, thr_block: float,
          block_only: bool, gen: np.random.Generator) -> None:
    nxt = np.roll(bits, -1)
    eng = np.flatnonzero((bits == 1) & (nxt == 0))
    if eng.size == 0:
        return
    if block_only:
        moved = eng
        if eng[-1] == n - 1 and gen.random() >= thr_block:
            moved = eng[:-1]
    else:
        u = gen.random(eng.size)
        thr = np.full(eng.size, thr_move)
        if eng[-1] == n - 1:
            thr[-1] = thr_block
        moved = eng[u < thr]
    bits[moved] = 0
    bits[(moved + 1) % n] = 1


def _count_engines(bits: np.ndarray) -> int:
    return int(np.count_nonzero((bits == 1) & (np.roll(bits, -1) == 0)))


def _in_omega_inf(bits: np.ndarray, L: int) -> bool:
    if not np.array_equal(bits[::-1], 1 - bits):
        return False
    return not np.any((bits[:L] == 1) & (bits[1:L + 1] == 1))


def engine_count(bits: np.ndarray) -> int:
    """Number of engines in the current state."""
    return _count_engines(bits)


def evolve(bits: np.ndarray, n_steps: int, thr_move: float, thr_block: float,
           block_only: bool, bit_generator) -> None:
    """Advance the state in place by n_steps synchronous updates."""
    gen = _generator(bit_generator)
    n = bits.shape[0]
    for _ in range(n_steps):
        _step(bits, n, thr_move, thr_block, block_only, gen)


def evolve_measure(bits: np.ndarray, n_steps: int, thr_move: float,
                   thr_block: float, block_only: bool, bit_generator,
                   out_engines: np.ndarray) -> None:
    """Advance n_steps, recording the engine count of each new state."""
    gen = _generator(bit_generator)
    n = bits.shape[0]
    for t in range(n_steps):
        _step(bits, n, thr_move, thr_block, block_only, gen)
        out_engines[t] = _count_engines(bits)


def evolve_density(bits: np.ndarray, n_steps: int, thr_move: float,
                   thr_block: float, block_only: bool, bit_generator,
                   acc: np.ndarray) -> None:
    """Advance n_steps, accumulating per-site occupancy of each new state."""
    gen = _generator(bit_generator)
    n = bits.shape[0]
    for _ in range(n_steps):
        _step(bits, n, thr_move, thr_block, block_only, gen)
        acc += bits


def hitting_time(bits: np.ndarray, thr_block: float, cap: int,
                 bit_generator) -> int:
    """Steps of the single-coin dynamics until the state is symmetric free flow.

    The test runs before each step, so a state already in the target set
    returns 0.  Returns -1 if the cap is reached first; the state is left
    wherever the walk ended.
    """
    gen = _generator(bit_generator)
    n = bits.shape[0]
    L = n // 2
    for t in range(cap):
        if _in_omega_inf(bits, L):
            return t
        _step(bits, n, 1.0, thr_block, True, gen)
    if _in_omega_inf(bits, L):
        return cap
    return -1
