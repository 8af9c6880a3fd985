"""Ring configurations, symmetry predicates, and train combinatorics.

Sites are labelled 1..2L around the ring; site 2L is followed by site 1,
and the bond 2L -> 1 is the one carrying the slow-bond penalty.  A
configuration is stored as a bit mask over internal indices 0..2L-1
(site s maps to index s-1), which keeps enumeration and exact-chain
bookkeeping cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "RingGeometry",
    "Configuration",
    "TrainDecomposition",
    "engines_mask",
    "advance_mask",
    "reverse_bits",
    "queue_configuration",
    "enumerate_configurations",
    "train_count_table",
    "train_count_list",
]


# --- low-level mask helpers -------------------------------------------------

def engines_mask(mask: int, n: int) -> int:
    """Bit mask of engine sites: occupied sites whose clockwise neighbour is empty."""
    nxt = (mask >> 1) | ((mask & 1) << (n - 1))
    return mask & ~nxt


def advance_mask(mask: int, subset: int, n: int) -> int:
    """Move every particle in ``subset`` one site clockwise (index j -> j+1 mod n)."""
    full = (1 << n) - 1
    shifted = ((subset << 1) & full) | (subset >> (n - 1))
    return (mask & ~subset) | shifted


def reverse_bits(mask: int, n: int) -> int:
    """Reverse the bit order of an n-bit mask (index j -> n-1-j)."""
    out = 0
    for _ in range(n):
        out = (out << 1) | (mask & 1)
        mask >>= 1
    return out


# --- geometry and configurations -------------------------------------------

@dataclass(frozen=True)
class RingGeometry:
    """A periodic lattice of 2L sites with the slow bond between sites 2L and 1."""

    half_size: int

    def __post_init__(self) -> None:
        if self.half_size < 2:
            raise ValueError("half_size must be at least 2 (ring of 4 sites)")

    @property
    def site_count(self) -> int:
        return 2 * self.half_size

    @property
    def blockage_bond(self) -> tuple[int, int]:
        """The (from, to) site pair of the penalised bond, 1-based."""
        return (self.site_count, 1)


@dataclass(frozen=True)
class TrainDecomposition:
    """Maximal blocks of consecutive particles, cyclically.

    Each entry is a (caboose_site, length) pair, 1-based, ordered by caboose
    site.  The engine of a train is its clockwise-most particle, the caboose
    its rear; for the degenerate all-occupied ring there is no hole, hence
    no engine and no train.
    """

    trains: tuple[tuple[int, int], ...]
    engine_count: int

    @property
    def train_count(self) -> int:
        return len(self.trains)

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(length for _, length in self.trains)


@dataclass(frozen=True)
class Configuration:
    """Occupancy of the ring, at most one particle per site."""

    geometry: RingGeometry
    mask: int

    def __post_init__(self) -> None:
        if not 0 <= self.mask < (1 << self.geometry.site_count):
            raise ValueError("mask out of range for this ring")

    @classmethod
    def from_bits(cls, bits: Sequence[int] | Iterable[int],
                  geometry: RingGeometry | None = None) -> "Configuration":
        """Build from a 0/1 sequence listing sites 1..2L in order."""
        seq = list(bits)
        if geometry is None:
            if len(seq) % 2:
                raise ValueError("site listing must have even length")
            geometry = RingGeometry(len(seq) // 2)
        elif len(seq) != geometry.site_count:
            raise ValueError("site listing does not match the geometry")
        mask = 0
        for j, b in enumerate(seq):
            if b not in (0, 1):
                raise ValueError("occupancies must be 0 or 1")
            mask |= b << j
        return cls(geometry, mask)

    @classmethod
    def from_array(cls, bits: np.ndarray, geometry: RingGeometry) -> "Configuration":
        return cls.from_bits(bits.tolist(), geometry)

    # -- views ---------------------------------------------------------------

    @property
    def bits(self) -> tuple[int, ...]:
        n = self.geometry.site_count
        return tuple((self.mask >> j) & 1 for j in range(n))

    def as_array(self) -> np.ndarray:
        """Occupancies as a uint8 array (index j holds site j+1)."""
        return np.array(self.bits, dtype=np.uint8)

    def site(self, s: int) -> int:
        """Occupancy of site s, 1-based."""
        n = self.geometry.site_count
        if not 1 <= s <= n:
            raise ValueError("site label out of range")
        return (self.mask >> (s - 1)) & 1

    def neg_site(self, i: int) -> int:
        """Occupancy under the mirror labelling: site -i means site 2L-i+1."""
        return self.site(self.geometry.site_count - i + 1)

    def bitstring(self) -> str:
        return "".join(str(b) for b in self.bits)

    def __str__(self) -> str:
        return self.bitstring()

    # -- counts and decompositions ------------------------------------------

    def particle_count(self) -> int:
        return self.mask.bit_count()

    def engine_count(self) -> int:
        n = self.geometry.site_count
        return engines_mask(self.mask, n).bit_count()

    def engine_sites(self) -> tuple[int, ...]:
        """1-based sites holding an engine, ascending."""
        n = self.geometry.site_count
        em = engines_mask(self.mask, n)
        return tuple(j + 1 for j in range(n) if (em >> j) & 1)

    def trains(self) -> TrainDecomposition:
        n = self.geometry.site_count
        mask = self.mask
        full = (1 << n) - 1
        if mask == 0 or mask == full:
            return TrainDecomposition((), 0)
        found = []
        for j in range(n):
            prev = (j - 1) % n
            if (mask >> j) & 1 and not (mask >> prev) & 1:
                length = 0
                k = j
                while (mask >> k) & 1:
                    length += 1
                    k = (k + 1) % n
                found.append((j + 1, length))
        return TrainDecomposition(tuple(found), len(found))

    # -- symmetry predicates -------------------------------------------------

    def is_ph_symmetric(self) -> bool:
        """True when exchanging particles and holes equals reversing the site order."""
        n = self.geometry.site_count
        full = (1 << n) - 1
        return reverse_bits(self.mask, n) == (~self.mask & full)

    def is_in_omega_inf(self) -> bool:
        """Particle-hole symmetric with every first-half particle free to move."""
        if not self.is_ph_symmetric():
            return False
        L = self.geometry.half_size
        for j in range(L):
            if (self.mask >> j) & 1 and (self.mask >> (j + 1)) & 1:
                return False
        return True


def queue_configuration(geometry: RingGeometry) -> Configuration:
    """All particles packed against the slow bond: sites L+1..2L occupied."""
    L = geometry.half_size
    return Configuration(geometry, ((1 << L) - 1) << L)


def enumerate_configurations(geometry: RingGeometry, m: int) -> Iterator[Configuration]:
    """All configurations with m particles, lexicographic in occupied-site tuples."""
    n = geometry.site_count
    if not 0 <= m <= n:
        raise ValueError("particle count out of range")
    for occ in combinations(range(n), m):
        mask = 0
        for j in occ:
            mask |= 1 << j
        yield Configuration(geometry, mask)


# --- train combinatorics ----------------------------------------------------

def train_count_table(L: int, l: int) -> int:
    """Number of half-filled ring states decomposing into exactly l trains.

    Exact integer; l=1 means a single block of L consecutive particles,
    which can start at any of the 2L sites.
    """
    if L < 1:
        raise ValueError("L must be positive")
    if not 1 <= l <= L:
        raise ValueError("train count must lie in 1..L")
    if l == 1:
        return 2 * L
    gaps = sum(l1 * math.comb(L - l1 - 1, l - 2) for l1 in range(1, L - l + 2))
    return 2 * gaps * math.comb(L - 1, l - 1)


@lru_cache(maxsize=None)
def train_count_list(L: int) -> tuple[int, ...]:
    """The full table (n(1), ..., n(L)); entries sum to C(2L, L)."""
    return tuple(train_count_table(L, l) for l in range(1, L + 1))
