"""Large-ring simulation harness: currents, density profiles, sweeps, scans.

All randomness flows through per-replica streams keyed by
(master_seed, work-item index, replica index), so every result is
reproducible bit for bit regardless of scheduling, worker count, or
kernel backend.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import kernels
from .dynamics import KernelParams, RandomSource
from .lattice import RingGeometry

__all__ = [
    "InitialState",
    "DensityMode",
    "SimulationSpec",
    "CurrentEstimate",
    "DensityProfile",
    "ThresholdResult",
    "HittingTimeStats",
    "default_horizon",
    "run_current",
    "density_profile",
    "sweep",
    "threshold_scan",
    "hitting_time_omega_inf",
]


class InitialState(Enum):
    HALF_FILLED_ALTERNATING = "alternating"
    QUEUE = "queue"
    RANDOM_HALF_FILLED = "random"


class DensityMode(Enum):
    SNAPSHOT = "snapshot"
    TIME_REPLICA_AVERAGE = "average"


def default_horizon(L: int, p: float) -> int:
    """Burn-in heuristic ceil(2 (L/p) ln L); a mixing-time guess, not a bound."""
    if L < 2:
        raise ValueError("L must be at least 2")
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    return math.ceil(2.0 * (L / p) * math.log(L))


@dataclass(frozen=True)
class SimulationSpec:
    """Everything needed to reproduce a run, seeds included.

    burn_in = None means 'use default_horizon(L, p)', resolved lazily so
    a template spec can be reused across parameter grids.
    """

    geometry: RingGeometry
    params: KernelParams
    burn_in: int | None = None
    measure_steps: int = 100
    replicas: int = 100
    master_seed: int = 0
    initial_state: InitialState = InitialState.RANDOM_HALF_FILLED

    def __post_init__(self) -> None:
        if self.burn_in is not None and self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")
        if self.measure_steps < 1:
            raise ValueError("measure_steps must be positive")
        if self.replicas < 1:
            raise ValueError("replicas must be positive")

    @property
    def effective_burn_in(self) -> int:
        if self.burn_in is not None:
            return self.burn_in
        return default_horizon(self.geometry.half_size, self.params.p)


@dataclass(frozen=True)
class CurrentEstimate:
    """Replica-pooled engine fraction: mean, standard error, and the spec echo."""

    mean: float
    std_error: float
    spec: SimulationSpec


@dataclass(frozen=True)
class DensityProfile:
    """Coarse-grained occupancies, one value per bin of bin_width sites."""

    bin_width: int
    values: tuple[float, ...]
    mode: DensityMode
    spec: SimulationSpec


@dataclass(frozen=True)
class ThresholdResult:
    """Smallest slow-bond strength with a resolvable current drop at fixed p.

    eps_star is None when no point of the scan exceeded the tolerance;
    noise_floor is the largest relative standard error met during the
    scan, below which deviations are indistinguishable from noise.
    """

    p: float
    eps_star: float | None
    tolerance: float
    noise_floor: float
    baseline_mean: float


@dataclass(frozen=True)
class HittingTimeStats:
    """First entry times into the symmetric free-flow set, per replica."""

    times: tuple[int, ...]
    censored: int
    cap: int

    @property
    def mean(self) -> float:
        return float(np.mean(self.times)) if self.times else math.nan

    @property
    def max(self) -> int:
        return max(self.times) if self.times else -1


# --- replica plumbing -------------------------------------------------------

def _initial_bits(spec: SimulationSpec, gen: np.random.Generator) -> np.ndarray:
    """Starting occupancies; the random option draws from the replica stream."""
    n = spec.geometry.site_count
    L = spec.geometry.half_size
    bits = np.zeros(n, dtype=np.uint8)
    if spec.initial_state is InitialState.HALF_FILLED_ALTERNATING:
        bits[0::2] = 1
    elif spec.initial_state is InitialState.QUEUE:
        bits[L:] = 1
    else:
        bits[gen.permutation(n)[:L]] = 1
    return bits


def _replica_start(spec: SimulationSpec, stream: tuple[int, ...],
                   ) -> tuple[np.ndarray, np.random.Generator]:
    gen = RandomSource(spec.master_seed, stream).generator()
    return _initial_bits(spec, gen), gen


# --- estimators -------------------------------------------------------------

def run_current(spec: SimulationSpec,
                _stream_prefix: tuple[int, ...] = ()) -> CurrentEstimate:
    """Average engine fraction over the measurement window, pooled over replicas.

    Each replica burns in for effective_burn_in steps, then records the
    engine count of the next measure_steps states.
    """
    thr_move, thr_block, block_only = spec.params.kernel_args()
    n = spec.geometry.site_count
    burn = spec.effective_burn_in
    counts = np.empty(spec.measure_steps, dtype=np.int64)
    means = np.empty(spec.replicas)
    for r in range(spec.replicas):
        bits, gen = _replica_start(spec, _stream_prefix + (r,))
        kernels.evolve(bits, burn, thr_move, thr_block, block_only,
                       gen.bit_generator)
        kernels.evolve_measure(bits, spec.measure_steps, thr_move, thr_block,
                               block_only, gen.bit_generator, counts)
        means[r] = counts.mean() / n
    std_error = 0.0
    if spec.replicas > 1:
        std_error = float(means.std(ddof=1) / math.sqrt(spec.replicas))
    return CurrentEstimate(float(means.mean()), std_error, spec)


def density_profile(spec: SimulationSpec, bin_width: int = 10,
                    mode: DensityMode = DensityMode.TIME_REPLICA_AVERAGE,
                    ) -> DensityProfile:
    """Coarse-grained occupancy profile.

    Snapshot: the single configuration of replica 0 after burn-in (bin
    sums times bin_width recover the particle count exactly).
    TimeReplicaAverage: occupancies averaged over the burn-in state plus
    the next measure_steps states, over all replicas.
    """
    n = spec.geometry.site_count
    if bin_width < 1 or n % bin_width:
        raise ValueError("bin_width must divide the site count")
    thr_move, thr_block, block_only = spec.params.kernel_args()
    burn = spec.effective_burn_in

    if mode is DensityMode.SNAPSHOT:
        bits, gen = _replica_start(spec, (0,))
        kernels.evolve(bits, burn, thr_move, thr_block, block_only,
                       gen.bit_generator)
        site_density = bits.astype(np.float64)
    else:
        total = np.zeros(n, dtype=np.int64)
        for r in range(spec.replicas):
            bits, gen = _replica_start(spec, (r,))
            kernels.evolve(bits, burn, thr_move, thr_block, block_only,
                           gen.bit_generator)
            acc = bits.astype(np.int64)
            kernels.evolve_density(bits, spec.measure_steps, thr_move, thr_block,
                                   block_only, gen.bit_generator, acc)
            total += acc
        samples = spec.replicas * (spec.measure_steps + 1)
        site_density = total / samples

    values = site_density.reshape(-1, bin_width).mean(axis=1)
    return DensityProfile(bin_width, tuple(float(v) for v in values), mode, spec)


# --- parameter sweeps -------------------------------------------------------

def _sweep_cell(args: tuple[SimulationSpec, int, float, float]) -> CurrentEstimate:
    template, cell_index, p, eps = args
    params = KernelParams(p=p, epsilon=eps, semantics=template.params.semantics)
    spec = replace(template, params=params)
    return run_current(spec, _stream_prefix=(cell_index,))


def sweep(p_grid: list[float], eps_grid: list[float], template: SimulationSpec,
          workers: int = 1) -> list[CurrentEstimate]:
    """One current estimate per (p, eps) grid point, row-major with p outer.

    Cell streams are keyed by the grid position, so the table is
    reproducible for any worker count and any grid chunking.
    """
    if not p_grid or not eps_grid:
        raise ValueError("grids must be nonempty")
    for p in p_grid:
        if not 0.0 < p <= 1.0:
            raise ValueError("p grid values must lie in (0, 1]")
    for eps in eps_grid:
        if not 0.0 <= eps <= 1.0:
            raise ValueError("eps grid values must lie in [0, 1]")
    cells = [
        (template, i * len(eps_grid) + j, p, eps)
        for i, p in enumerate(p_grid)
        for j, eps in enumerate(eps_grid)
    ]
    if workers <= 1:
        return [_sweep_cell(cell) for cell in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_cell, cells))


def threshold_scan(p: float, relative_tolerance: float = 0.01,
                   template: SimulationSpec | None = None,
                   coarse_step: float = 0.05,
                   resolution: float = 0.005) -> ThresholdResult:
    """Smallest eps whose current deviates from the eps = 0 baseline by more
    than the relative tolerance.

    A coarse pass locates the first exceeding grid point, then bisection
    narrows the bracket to the stated resolution.  The threshold is a
    statistical object: the noise floor reported alongside is the largest
    relative standard error met during the scan, and thresholds at or
    below it should not be trusted.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    if template is None:
        template = SimulationSpec(
            geometry=RingGeometry(500),
            params=KernelParams(p=p),
            measure_steps=2000,
            replicas=16,
        )
    counter = 0
    noise = 0.0

    def measure(eps: float) -> CurrentEstimate:
        nonlocal counter
        params = KernelParams(p=p, epsilon=eps,
                              semantics=template.params.semantics)
        spec = replace(template, params=params)
        est = run_current(spec, _stream_prefix=(counter,))
        counter += 1
        return est

    baseline = measure(0.0)
    j0 = baseline.mean

    def deviation(eps: float) -> float:
        nonlocal noise
        est = measure(eps)
        noise = max(noise, math.hypot(est.std_error, baseline.std_error) / j0)
        return abs(est.mean - j0) / j0

    lo, hi = 0.0, None
    eps = coarse_step
    while eps <= 1.0 + 1e-12:
        if deviation(min(eps, 1.0)) > relative_tolerance:
            hi = min(eps, 1.0)
            break
        lo = eps
        eps += coarse_step
    if hi is None:
        return ThresholdResult(p, None, relative_tolerance, noise, j0)
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if deviation(mid) > relative_tolerance:
            hi = mid
        else:
            lo = mid
    return ThresholdResult(p, hi, relative_tolerance, noise, j0)


# --- hitting times ----------------------------------------------------------

def hitting_time_omega_inf(spec: SimulationSpec, cap: int = 1_000_000,
                           ) -> HittingTimeStats:
    """Per-replica first entry time into the symmetric free-flow set.

    Only defined for the deterministic rule (p = 1) with 0 < eps < 1;
    replicas that have not entered within cap steps are reported as
    censored rather than guessed.
    """
    if spec.params.p != 1.0:
        raise ValueError("hitting times are defined for the p = 1 rule")
    if not 0.0 < spec.params.epsilon < 1.0:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    _, thr_block, _ = spec.params.kernel_args()
    times = []
    censored = 0
    for r in range(spec.replicas):
        bits, gen = _replica_start(spec, (r,))
        t = kernels.hitting_time(bits, thr_block, cap, gen.bit_generator)
        if t < 0:
            censored += 1
        else:
            times.append(int(t))
    return HittingTimeStats(tuple(times), censored, cap)
