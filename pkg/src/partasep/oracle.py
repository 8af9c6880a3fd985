"""Exact small-ring analysis: transition matrices, balance checks, stationary solves.

Everything here enumerates a fixed-particle-number sector, so sizes are
guarded: full enumeration up to 2L = 24, dense linear algebra up to
2L = 12, sparse power iteration in between.  Balance checks run in exact
rational arithmetic whenever the parameters allow it.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .analytic import product_form_weight
from .dynamics import BlockageSemantics, KernelParams, transition_weight
from .lattice import (
    Configuration,
    RingGeometry,
    advance_mask,
    engines_mask,
    enumerate_configurations,
    queue_configuration,
)

__all__ = [
    "StateSpaceTooLargeError",
    "ReducibleChainError",
    "ExactChain",
    "StationaryDistribution",
    "CurrentReport",
    "build_chain",
    "check_global_balance",
    "caboose_bijection_check",
    "stationary_distribution",
    "power_iteration_stationary",
    "verify_weight_stationarity",
    "recurrent_support_rule184",
    "exact_current",
    "product_form_discrepancy",
]

MAX_SITES = 24
MAX_DENSE_SITES = 12


class StateSpaceTooLargeError(RuntimeError):
    """The requested sector exceeds the enumeration or dense-solve guard."""


class ReducibleChainError(RuntimeError):
    """The chain has several closed communicating classes; reports them."""

    def __init__(self, closed_classes: Sequence[tuple[int, ...]]):
        self.closed_classes = tuple(tuple(c) for c in closed_classes)
        sizes = ", ".join(str(len(c)) for c in self.closed_classes)
        super().__init__(
            f"{len(self.closed_classes)} closed classes (sizes: {sizes}); "
            "no unique stationary distribution"
        )


@dataclass
class ExactChain:
    """A fixed-particle-number sector with its one-step transition matrix."""

    geometry: RingGeometry
    m: int
    params: KernelParams
    masks: np.ndarray
    matrix: np.ndarray | sp.csr_matrix
    dense: bool

    @property
    def n_states(self) -> int:
        return len(self.masks)

    def state(self, i: int) -> Configuration:
        return Configuration(self.geometry, int(self.masks[i]))

    @property
    def states(self) -> list[Configuration]:
        return [self.state(i) for i in range(self.n_states)]

    def engine_counts(self) -> np.ndarray:
        n = self.geometry.site_count
        return np.array(
            [engines_mask(int(mk), n).bit_count() for mk in self.masks], dtype=np.int64
        )

    def first_half_counts(self) -> np.ndarray:
        """Particles in sites 1..L, per state."""
        L = self.geometry.half_size
        half = (1 << L) - 1
        return np.array([(int(mk) & half).bit_count() for mk in self.masks],
                        dtype=np.int64)

    def second_half_free_counts(self) -> np.ndarray:
        """Free particles (empty site ahead) among sites L+1..2L, per state.

        Equals the first-half particle count on mirror-symmetric states
        except when the engine sits exactly on site 2L, where the two
        counts differ by one; both are therefore recorded separately.
        """
        n = self.geometry.site_count
        L = self.geometry.half_size
        upper = ((1 << L) - 1) << L
        out = np.empty(self.n_states, dtype=np.int64)
        for i, mk in enumerate(self.masks):
            em = engines_mask(int(mk), n)
            out[i] = (em & upper).bit_count()
        return out


@dataclass
class StationaryDistribution:
    """Stationary probabilities over a chain's states, with solve diagnostics."""

    probabilities: np.ndarray
    residual: float
    closed_classes: tuple[tuple[int, ...], ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class CurrentReport:
    """Stationary expectations: engines per site and first-half particles per L."""

    engine_fraction: float
    first_half_fraction: float
    second_half_free_fraction: float


# --- chain construction -----------------------------------------------------

def build_chain(geometry: RingGeometry, m: int, params: KernelParams) -> ExactChain:
    """Enumerate the m-particle sector and assemble its transition matrix."""
    n = geometry.site_count
    if n > MAX_SITES:
        raise StateSpaceTooLargeError(
            f"{n} sites exceed the enumeration guard of {MAX_SITES}"
        )
    if not 0 <= m <= n:
        raise ValueError("particle count out of range")
    masks = np.array(
        [cfg.mask for cfg in enumerate_configurations(geometry, m)], dtype=np.int64
    )
    index = {int(mk): i for i, mk in enumerate(masks)}
    n_states = len(masks)
    dense = n <= MAX_DENSE_SITES

    thr_move, thr_block = params.move_probabilities()
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []

    for i, mk in enumerate(masks):
        mask = int(mk)
        em = engines_mask(mask, n)
        if params.limit_kernel:
            blockage_engine = (em >> (n - 1)) & 1
            if blockage_engine:
                if thr_block > 0.0:
                    tau = advance_mask(mask, em, n)
                    rows.append(i); cols.append(index[tau]); vals.append(thr_block)
                if thr_block < 1.0:
                    tau = advance_mask(mask, em & ~(1 << (n - 1)), n)
                    rows.append(i); cols.append(index[tau]); vals.append(1.0 - thr_block)
            else:
                tau = advance_mask(mask, em, n)
                rows.append(i); cols.append(index[tau]); vals.append(1.0)
            continue
        engine_bits = [1 << j for j in range(n) if (em >> j) & 1]
        probs = [thr_block if bit == 1 << (n - 1) else thr_move for bit in engine_bits]
        for pick in range(1 << len(engine_bits)):
            subset = 0
            prob = 1.0
            for k, bit in enumerate(engine_bits):
                if (pick >> k) & 1:
                    subset |= bit
                    prob *= probs[k]
                else:
                    prob *= 1.0 - probs[k]
            if prob == 0.0:
                continue
            tau = advance_mask(mask, subset, n)
            rows.append(i); cols.append(index[tau]); vals.append(prob)

    coo = sp.coo_matrix((vals, (rows, cols)), shape=(n_states, n_states))
    matrix: np.ndarray | sp.csr_matrix
    if dense:
        matrix = coo.toarray()
    else:
        matrix = coo.tocsr()
        matrix.sum_duplicates()
    return ExactChain(geometry, m, params, masks, matrix, dense)


# --- exact balance checks ---------------------------------------------------

def check_global_balance(geometry: RingGeometry, m: int, omega, epsilon=0):
    """Max over states of |total outgoing weight - total incoming weight|.

    Exactly zero without a slow bond; injecting epsilon > 0 breaks the
    balance.  Computed in exact rationals when omega and epsilon are
    rational, so zero means identically zero.
    """
    omega = Fraction(omega) if not isinstance(omega, float) else omega
    epsilon = Fraction(epsilon) if not isinstance(epsilon, float) else epsilon
    n = geometry.site_count
    if n > MAX_SITES:
        raise StateSpaceTooLargeError(
            f"{n} sites exceed the enumeration guard of {MAX_SITES}"
        )
    out_weight: dict[int, object] = {}
    in_weight: defaultdict[int, object] = defaultdict(lambda: omega * 0)
    for cfg in enumerate_configurations(geometry, m):
        mask = cfg.mask
        em = engines_mask(mask, n)
        engine_bits = [1 << j for j in range(n) if (em >> j) & 1]
        total = omega * 0
        for pick in range(1 << len(engine_bits)):
            subset = 0
            for k, bit in enumerate(engine_bits):
                if (pick >> k) & 1:
                    subset |= bit
            w = omega ** subset.bit_count()
            if (subset >> (n - 1)) & 1:
                w = w * (1 - epsilon)
            total = total + w
            tau = advance_mask(mask, subset, n)
            in_weight[tau] = in_weight[tau] + w
        out_weight[mask] = total
    worst = omega * 0
    for mask, out_w in out_weight.items():
        gap = abs(out_w - in_weight[mask])
        if gap > worst:
            worst = gap
    return worst


def caboose_bijection_check(config: Configuration, omega=Fraction(2)) -> bool:
    """Verify the pairing between advanced-engine and detached-caboose moves.

    For every subset S of trains, advancing the engines of S leads out of
    sigma with weight omega^|S|, while detaching the cabooses of S yields
    a distinct predecessor entering sigma with the same weight; together
    the predecessors exhaust the incoming weight, so in- and out-flows
    match term by term.
    """
    n = config.geometry.site_count
    mask = config.mask
    decomposition = config.trains()
    caboose_bits = [1 << (site - 1) for site, _ in decomposition.trains]

    seen: set[int] = set()
    total_paired = omega * 0
    for pick in range(1 << len(caboose_bits)):
        subset = 0
        for k, bit in enumerate(caboose_bits):
            if (pick >> k) & 1:
                subset |= bit
        detached = (mask & ~subset) | _shift_back(subset, n)
        if detached in seen:
            return False
        seen.add(detached)
        predecessor = Configuration(config.geometry, detached)
        w = transition_weight(predecessor, config, omega)
        if w != omega ** subset.bit_count():
            return False
        total_paired = total_paired + w

    total_in = omega * 0
    for other in enumerate_configurations(config.geometry, config.particle_count()):
        total_in = total_in + transition_weight(other, config, omega)
    total_out = omega * 0
    for pick in range(1 << decomposition.engine_count):
        total_out = total_out + omega ** bin(pick).count("1")
    return total_paired == total_in == total_out


def _shift_back(subset: int, n: int) -> int:
    """Move every marked site one step counterclockwise (index j -> j-1 mod n)."""
    full = (1 << n) - 1
    return ((subset >> 1) | ((subset & 1) << (n - 1))) & full


# --- stationary solves ------------------------------------------------------

def _closed_classes(matrix) -> list[tuple[int, ...]]:
    support = sp.csr_matrix(matrix != 0) if not sp.issparse(matrix) else (
        sp.csr_matrix((np.ones_like(matrix.data), matrix.indices, matrix.indptr),
                      shape=matrix.shape)
    )
    n_comp, labels = connected_components(support, directed=True, connection="strong")
    closed = [True] * n_comp
    coo = support.tocoo()
    for i, j in zip(coo.row, coo.col):
        if labels[i] != labels[j]:
            closed[labels[i]] = False
    out = []
    for c in range(n_comp):
        if closed[c]:
            out.append(tuple(int(i) for i in np.flatnonzero(labels == c)))
    return out


def stationary_distribution(chain: ExactChain) -> StationaryDistribution:
    """Solve pi P = pi on the unique closed class; transient states get 0.

    Dense sectors use a linear solve with one balance equation replaced
    by normalization; larger sectors fall back to averaged power
    iteration.  Several closed classes raise ReducibleChainError listing
    them.
    """
    closed = _closed_classes(chain.matrix)
    if len(closed) > 1:
        raise ReducibleChainError(closed)
    support = np.array(closed[0], dtype=np.intp)
    n_states = chain.n_states

    if chain.dense:
        sub = np.asarray(chain.matrix)[np.ix_(support, support)]
        k = len(support)
        a = sub.T - np.eye(k)
        a[-1, :] = 1.0
        b = np.zeros(k)
        b[-1] = 1.0
        pi_sub = np.linalg.solve(a, b)
    else:
        pi_sub = _lazy_power_iteration(chain.matrix[support][:, support])

    pi_sub = np.clip(pi_sub, 0.0, None)
    pi_sub /= pi_sub.sum()
    pi = np.zeros(n_states)
    pi[support] = pi_sub
    residual = _residual(chain.matrix, pi)
    return StationaryDistribution(pi, residual, tuple(closed))


def _residual(matrix, pi: np.ndarray) -> float:
    if sp.issparse(matrix):
        pi_next = matrix.T.dot(pi)
    else:
        pi_next = pi @ matrix
    return float(np.abs(pi_next - pi).sum())


def _lazy_power_iteration(matrix, tol: float = 1e-14,
                          max_iter: int = 500_000) -> np.ndarray:
    """Power iteration on the lazy chain (P + I)/2.

    The lazy chain shares the stationary vector but is aperiodic, so the
    iteration converges geometrically even when the original chain cycles
    (as the deterministic rule does without a slow bond).
    """
    matrix = sp.csr_matrix(matrix)
    k = matrix.shape[0]
    x = np.full(k, 1.0 / k)
    for _ in range(max_iter):
        x_next = 0.5 * (x + matrix.T.dot(x))
        x_next /= x_next.sum()
        if np.abs(x_next - x).sum() < tol:
            return x_next
        x = x_next
    return x


def power_iteration_stationary(chain: ExactChain, tol: float = 1e-14,
                               max_iter: int = 500_000) -> np.ndarray:
    """Independent cross-check of the linear solve via lazy power iteration."""
    closed = _closed_classes(chain.matrix)
    if len(closed) > 1:
        raise ReducibleChainError(closed)
    support = np.array(closed[0], dtype=np.intp)
    if chain.dense:
        sub = sp.csr_matrix(np.asarray(chain.matrix)[np.ix_(support, support)])
    else:
        sub = chain.matrix[support][:, support]
    pi_sub = _lazy_power_iteration(sub, tol=tol, max_iter=max_iter)
    pi = np.zeros(chain.n_states)
    pi[support] = pi_sub / pi_sub.sum()
    return pi


# --- stationary-measure validation -----------------------------------------

def verify_weight_stationarity(geometry: RingGeometry, m: int, omega: float) -> float:
    """Max |pi(sigma) - (1 + omega)^l(sigma) / W| over the sector, no slow bond."""
    params = KernelParams.from_omega(omega)
    chain = build_chain(geometry, m, params)
    dist = stationary_distribution(chain)
    lengths = chain.engine_counts()
    weights = (1.0 + omega) ** lengths
    weights /= weights.sum()
    return float(np.max(np.abs(dist.probabilities - weights)))


def recurrent_support_rule184(geometry: RingGeometry, epsilon: float,
                              ) -> list[Configuration]:
    """Recurrent class of the deterministic rule with a slow bond, half filling.

    A subset of the symmetric free-flow states that always contains the
    fully queued state; ordered by state index.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    chain = build_chain(geometry, geometry.half_size, KernelParams(1.0, epsilon))
    closed = _closed_classes(chain.matrix)
    if len(closed) != 1:
        raise ReducibleChainError(closed)
    return [chain.state(i) for i in closed[0]]


def exact_current(chain: ExactChain, dist: StationaryDistribution) -> CurrentReport:
    """Stationary engine fraction and half-ring occupancy fractions."""
    pi = dist.probabilities
    n = chain.geometry.site_count
    L = chain.geometry.half_size
    engine_fraction = float(pi @ chain.engine_counts()) / n
    first_half = float(pi @ chain.first_half_counts()) / L
    second_free = float(pi @ chain.second_half_free_counts()) / L
    return CurrentReport(engine_fraction, first_half, second_free)


def product_form_discrepancy(chain: ExactChain, dist: StationaryDistribution) -> float:
    """Gap between the solved measure and the two-site product weights.

    Both are normalized over the recurrent states with site 1 empty; the
    product form is only claimed asymptotically, so the returned gap is a
    finite-size diagnostic, not an error.
    """
    epsilon = chain.params.epsilon
    L = chain.geometry.half_size
    pi = dist.probabilities
    rows = [i for i in range(chain.n_states)
            if pi[i] > 0 and not int(chain.masks[i]) & 1]
    if not rows:
        return 0.0
    first_half = chain.first_half_counts()
    solved = np.array([pi[i] for i in rows])
    solved /= solved.sum()
    product = np.array(
        [product_form_weight(int(first_half[i]), L, epsilon) for i in rows]
    )
    product /= product.sum()
    return float(np.max(np.abs(solved - product)))
