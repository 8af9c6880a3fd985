"""Synchronous dynamics: update rules, transition weights, randomness policy.

Every free particle (engine) tries to hop one site clockwise with
probability p = omega / (1 + omega); at p = 1 the update degenerates to
the deterministic cellular-automaton rule, where the only remaining coin
is the slow bond's.  The bond 2L -> 1 carries a penalty factor (1 - eps),
and two inequivalent readings of that penalty are supported, differing in
how the per-step blocked-hop probability is built from eps.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .lattice import Configuration, advance_mask, engines_mask

__all__ = [
    "BlockageSemantics",
    "KernelParams",
    "RandomSource",
    "step_parallel",
    "step_rule184_blockage",
    "step_serial",
    "transition_weight",
    "reachable_successors",
]


class BlockageSemantics(enum.Enum):
    """How the slow-bond penalty enters the per-step hop probability.

    BERNOULLI_ATTEMPT: the engine on site 2L attempts with probability p
    and the attempt survives the bond with probability (1 - eps), so it
    hops with p * (1 - eps).  This is the default; it keeps the p -> 1
    limit identical to the deterministic rule with a single slow-bond coin.

    RENORMALIZED_WEIGHT: the hop weight omega is rescaled to
    omega * (1 - eps) and the probability rebuilt from it, giving
    omega * (1 - eps) / (1 + omega * (1 - eps)).  For eps < 1 this tends
    to 1 as omega grows, i.e. the penalty fades in the deterministic
    limit, which is why it is not the default.
    """

    BERNOULLI_ATTEMPT = "bernoulli"
    RENORMALIZED_WEIGHT = "renormalized"


@dataclass(frozen=True)
class KernelParams:
    """Hop probability, slow-bond strength, and penalty semantics."""

    p: float
    epsilon: float = 0.0
    semantics: BlockageSemantics = BlockageSemantics.BERNOULLI_ATTEMPT

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")

    @classmethod
    def from_omega(cls, omega: float, epsilon: float = 0.0,
                   semantics: BlockageSemantics = BlockageSemantics.BERNOULLI_ATTEMPT,
                   ) -> "KernelParams":
        """Build from the hop weight omega; omega = inf gives the p = 1 rule."""
        if omega < 0:
            raise ValueError("omega must be nonnegative")
        p = 1.0 if math.isinf(omega) else omega / (1.0 + omega)
        return cls(p=p, epsilon=epsilon, semantics=semantics)

    @property
    def omega(self) -> float:
        """Hop weight p / (1 - p); infinite at p = 1."""
        if self.p == 1.0:
            return math.inf
        return self.p / (1.0 - self.p)

    @property
    def limit_kernel(self) -> bool:
        """True for the deterministic p = 1 rule with its single slow-bond coin."""
        return self.p == 1.0

    def move_probabilities(self) -> tuple[float, float]:
        """(hop probability away from the slow bond, hop probability across it)."""
        if self.semantics is BlockageSemantics.BERNOULLI_ATTEMPT:
            blocked = self.p * (1.0 - self.epsilon)
        elif self.p == 1.0:
            blocked = 1.0 if self.epsilon < 1.0 else 0.0
        else:
            w = self.omega * (1.0 - self.epsilon)
            blocked = w / (1.0 + w)
        return self.p, blocked

    def kernel_args(self) -> tuple[float, float, bool]:
        """(thr_move, thr_block, single-coin mode) for the trajectory kernels."""
        thr_move, thr_block = self.move_probabilities()
        return thr_move, thr_block, self.limit_kernel


@dataclass(frozen=True)
class RandomSource:
    """Seed policy: a master seed plus a stream key.

    Streams with equal (master_seed, stream) produce identical draws
    regardless of what other streams were created, so trajectories are
    reproducible across schedules, worker counts, and kernel backends.
    """

    master_seed: int
    stream: tuple[int, ...] = ()

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=tuple(self.stream))
        return np.random.Generator(np.random.PCG64(seq))


# --- single-step evolution --------------------------------------------------

def step_parallel(config: Configuration, params: KernelParams,
                  gen: np.random.Generator) -> Configuration:
    """One synchronous update; all engines decide from the pre-step state."""
    bits = config.as_array()
    thr_move, thr_block, block_only = params.kernel_args()
    kernels.evolve(bits, 1, thr_move, thr_block, block_only, gen.bit_generator)
    return Configuration.from_array(bits, config.geometry)


def step_rule184_blockage(config: Configuration, epsilon: float,
                          gen: np.random.Generator) -> Configuration:
    """One step of the deterministic rule with a slow-bond coin of strength eps."""
    params = KernelParams(p=1.0, epsilon=epsilon)
    return step_parallel(config, params, gen)


def step_serial(config: Configuration, epsilon: float,
                gen: np.random.Generator) -> Configuration:
    """Random-sequential comparison step: pick one particle uniformly, try to hop.

    Draw order: one index draw always, then one uniform only when the
    picked particle sits on site 2L with site 1 empty.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    n = config.geometry.site_count
    mask = config.mask
    m = config.particle_count()
    if m == 0:
        raise ValueError("no particle to pick")
    occupied = [j for j in range(n) if (mask >> j) & 1]
    j = occupied[int(gen.integers(m))]
    target = (j + 1) % n
    if (mask >> target) & 1:
        return config
    if j == n - 1 and gen.random() >= 1.0 - epsilon:
        return config
    return Configuration(config.geometry, (mask & ~(1 << j)) | (1 << target))


# --- exact transition structure --------------------------------------------

def transition_weight(sigma: Configuration, tau: Configuration, omega,
                      epsilon=0):
    """Unnormalised weight of the one-step transition sigma -> tau.

    omega ** (number of moved particles), times (1 - eps) when the move
    set crosses the slow bond; zero when tau is not reachable in one
    step.  Works with Fraction arguments for exact arithmetic.
    """
    if sigma.geometry != tau.geometry:
        raise ValueError("configurations live on different rings")
    zero = omega * 0
    if sigma.particle_count() != tau.particle_count():
        return zero
    n = sigma.geometry.site_count
    gone = sigma.mask & ~tau.mask
    if gone & ~engines_mask(sigma.mask, n):
        return zero
    if advance_mask(sigma.mask, gone, n) != tau.mask:
        return zero
    moved = gone.bit_count()
    weight = omega ** moved
    if (gone >> (n - 1)) & 1:
        weight = weight * (1 - epsilon)
    return weight


def reachable_successors(config: Configuration) -> list[tuple[Configuration, int]]:
    """All one-step successors with their moved-particle counts.

    One entry per subset of the engine set (2 ** engine_count states, all
    distinct), ordered with the move count nondecreasing last-to-first
    subset bit; the empty move set (tau = sigma) comes first.
    """
    n = config.geometry.site_count
    em = engines_mask(config.mask, n)
    engine_bits = [1 << j for j in range(n) if (em >> j) & 1]
    out = []
    for pick in range(1 << len(engine_bits)):
        subset = 0
        for k, bit in enumerate(engine_bits):
            if (pick >> k) & 1:
                subset |= bit
        tau = Configuration(config.geometry, advance_mask(config.mask, subset, n))
        out.append((tau, subset.bit_count()))
    return out
