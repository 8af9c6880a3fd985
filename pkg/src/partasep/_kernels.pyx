# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled trajectory kernels for the ring exclusion process.

Draw-for-draw compatible with the numpy fallback: one uniform per engine
in ascending site order in normal mode, a single slow-bond coin in the
p = 1 mode.  Uniforms come straight from the bit generator's
``next_double``, which is exactly what ``Generator.random`` consumes.
"""

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from numpy.random cimport bitgen_t

BACKEND_NAME = "compiled"

cdef const char *CAPSULE_NAME = "BitGenerator"


cdef bitgen_t *_state(object bit_generator) except NULL:
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, CAPSULE_NAME):
        raise ValueError("expected a numpy BitGenerator")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, CAPSULE_NAME)


cdef void _step(unsigned char *bits, Py_ssize_t n, double thr_move,
                double thr_block, bint block_only, bitgen_t *rng) noexcept:
    # Single pass over sites; `cur`/`nxt` carry pre-step occupancies so the
    # update stays synchronous even though writes land in place.
    cdef Py_ssize_t i
    cdef unsigned char first = bits[0]
    cdef unsigned char cur = first
    cdef unsigned char nxt
    cdef double u
    for i in range(n):
        nxt = first if i == n - 1 else bits[i + 1]
        if cur == 1 and nxt == 0:
            if block_only:
                if i == n - 1:
                    u = rng.next_double(rng.state)
                    if u < thr_block:
                        bits[i] = 0
                        bits[0] = 1
                else:
                    bits[i] = 0
                    bits[i + 1] = 1
            else:
                u = rng.next_double(rng.state)
                if u < (thr_block if i == n - 1 else thr_move):
                    bits[i] = 0
                    if i == n - 1:
                        bits[0] = 1
                    else:
                        bits[i + 1] = 1
        cur = nxt


cdef Py_ssize_t _count_engines(unsigned char *bits, Py_ssize_t n) noexcept:
    cdef Py_ssize_t i, count = 0
    for i in range(n - 1):
        if bits[i] == 1 and bits[i + 1] == 0:
            count += 1
    if bits[n - 1] == 1 and bits[0] == 0:
        count += 1
    return count


cdef bint _in_omega_inf(unsigned char *bits, Py_ssize_t n) noexcept:
    cdef Py_ssize_t L = n // 2
    cdef Py_ssize_t j
    for j in range(n):
        if bits[n - 1 - j] != 1 - bits[j]:
            return False
    for j in range(L):
        if bits[j] == 1 and bits[j + 1] == 1:
            return False
    return True


def engine_count(unsigned char[::1] bits):
    """Number of engines in the current state."""
    return _count_engines(&bits[0], bits.shape[0])


def evolve(unsigned char[::1] bits, long long n_steps, double thr_move,
           double thr_block, bint block_only, object bit_generator):
    """Advance the state in place by n_steps synchronous updates."""
    cdef bitgen_t *rng = _state(bit_generator)
    cdef Py_ssize_t n = bits.shape[0]
    cdef long long t
    with bit_generator.lock:
        for t in range(n_steps):
            _step(&bits[0], n, thr_move, thr_block, block_only, rng)


def evolve_measure(unsigned char[::1] bits, long long n_steps, double thr_move,
                   double thr_block, bint block_only, object bit_generator,
                   long long[::1] out_engines):
    """Advance n_steps, recording the engine count of each new state."""
    cdef bitgen_t *rng = _state(bit_generator)
    cdef Py_ssize_t n = bits.shape[0]
    cdef long long t
    if out_engines.shape[0] < n_steps:
        raise ValueError("output buffer shorter than the number of steps")
    with bit_generator.lock:
        for t in range(n_steps):
            _step(&bits[0], n, thr_move, thr_block, block_only, rng)
            out_engines[t] = _count_engines(&bits[0], n)


def evolve_density(unsigned char[::1] bits, long long n_steps, double thr_move,
                   double thr_block, bint block_only, object bit_generator,
                   long long[::1] acc):
    """Advance n_steps, accumulating per-site occupancy of each new state."""
    cdef bitgen_t *rng = _state(bit_generator)
    cdef Py_ssize_t n = bits.shape[0]
    cdef Py_ssize_t j
    cdef long long t
    if acc.shape[0] != n:
        raise ValueError("accumulator length must match the ring size")
    with bit_generator.lock:
        for t in range(n_steps):
            _step(&bits[0], n, thr_move, thr_block, block_only, rng)
            for j in range(n):
                acc[j] += bits[j]


def hitting_time(unsigned char[::1] bits, double thr_block, long long cap,
                 object bit_generator):
    """Steps of the single-coin dynamics until the state is symmetric free flow.

    The test runs before each step, so a state already in the target set
    returns 0.  Returns -1 if the cap is reached first; the state is left
    wherever the walk ended.
    """
    cdef bitgen_t *rng = _state(bit_generator)
    cdef Py_ssize_t n = bits.shape[0]
    cdef long long t
    with bit_generator.lock:
        for t in range(cap):
            if _in_omega_inf(&bits[0], n):
                return t
            _step(&bits[0], n, 1.0, thr_block, True, rng)
    if _in_omega_inf(&bits[0], n):
        return cap
    return -1
