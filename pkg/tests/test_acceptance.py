"""Acceptance gate: one test per release criterion, one PASS/FAIL line each.

Run with plain pytest; the summary lines bypass output capture so they
appear in any mode.  The slow test is criterion 7, whose 441-point sweep
takes on the order of fifteen minutes on one core.
"""

from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import replace
from fractions import Fraction

from partasep import KernelParams, RingGeometry, SimulationSpec, queue_configuration
from partasep.analytic import (
    blockage_current_closed_form,
    blockage_current_finite_L,
    current_closed_form,
    current_finite_L,
    maximize_blockage_saddle,
    maximize_saddle,
    saddle_objective,
)
from partasep.cli import parse_grid
from partasep.dynamics import BlockageSemantics
from partasep.lattice import (
    Configuration,
    advance_mask,
    engines_mask,
    enumerate_configurations,
    train_count_table,
)
from partasep.montecarlo import (
    DensityMode,
    density_profile,
    run_current,
    sweep,
    threshold_scan,
)
from partasep.oracle import (
    build_chain,
    check_global_balance,
    exact_current,
    recurrent_support_rule184,
    stationary_distribution,
    verify_weight_stationarity,
)


def _report(capsys, number: int, name: str, ok: bool, detail: str,
            elapsed: float) -> None:
    status = "PASS" if ok else "FAIL"
    with capsys.disabled():
        print(f"criterion {number} [{name}]: {status} ({detail}, "
              f"{elapsed:.1f}s)", flush=True)


class TestAcceptance:
    def test_criterion_1_stationary_measure(self, capsys):
        start = time.time()
        worst_weight = 0.0
        worst_balance = Fraction(0)
        exact_types = True
        for sites in (4, 6, 8, 10):
            geo = RingGeometry(sites // 2)
            for m in range(0, geo.half_size + 1):
                for omega in (Fraction(1, 2), Fraction(1), Fraction(2),
                              Fraction(5)):
                    err = verify_weight_stationarity(geo, m, float(omega))
                    worst_weight = max(worst_weight, err)
                    violation = check_global_balance(geo, m, omega)
                    exact_types = exact_types and isinstance(violation,
                                                             Fraction)
                    worst_balance = max(worst_balance, violation)
        elapsed = time.time() - start
        ok = (worst_weight <= 1e-10 and worst_balance == 0 and exact_types
              and elapsed < 60)
        _report(capsys, 1, "stationary measure", ok,
                f"max weight error {worst_weight:.2e}, "
                f"exact balance violation {worst_balance}", elapsed)
        assert ok

    def test_criterion_2_current_formula(self, capsys):
        start = time.time()
        worst_gap = 0.0
        monotone = True
        for omega in (0.5, 1.0, 3.0, 10.0):
            closed = current_closed_form(omega)
            gaps = [abs(current_finite_L(L, omega) - closed)
                    for L in (50, 100, 200, 400)]
            monotone = monotone and all(b < a for a, b in zip(gaps, gaps[1:]))
            worst_gap = max(worst_gap, gaps[-1])

        worst_mc = 0.0
        for p in (0.2, 0.5, 0.8):
            spec = SimulationSpec(geometry=RingGeometry(500),
                                  params=KernelParams(p=p),
                                  replicas=4, measure_steps=500,
                                  master_seed=11)
            estimate = run_current(spec)
            closed = current_closed_form(p / (1 - p))
            worst_mc = max(worst_mc, abs(estimate.mean - closed))
        elapsed = time.time() - start
        ok = (monotone and worst_gap < 0.01 and worst_mc <= 0.01
              and elapsed < 300)
        _report(capsys, 2, "current formula", ok,
                f"L=400 gap {worst_gap:.2e} strictly decreasing, "
                f"max Monte Carlo error {worst_mc:.2e}", elapsed)
        assert ok

    def test_criterion_3_blockage_current(self, capsys):
        start = time.time()
        eps_grid = [k / 10 for k in range(1, 10)]

        worst_oracle = 0.0
        for sites in (4, 6, 8):
            geo = RingGeometry(sites // 2)
            for eps in eps_grid:
                chain = build_chain(geo, geo.half_size,
                                    KernelParams(p=1.0, epsilon=eps))
                report = exact_current(chain, stationary_distribution(chain))
                target = (1 - eps) / (2 - eps)
                worst_oracle = max(worst_oracle,
                                   abs(report.first_half_fraction - target))

        worst_mc = 0.0
        worst_finite = 0.0
        for eps in eps_grid:
            closed = blockage_current_closed_form(eps)
            spec = SimulationSpec(geometry=RingGeometry(500),
                                  params=KernelParams(p=1.0, epsilon=eps),
                                  replicas=8, measure_steps=2000,
                                  master_seed=13)
            worst_mc = max(worst_mc, abs(run_current(spec).mean - closed))
            worst_finite = max(worst_finite,
                               abs(blockage_current_finite_L(500, eps)
                                   - closed))
        elapsed = time.time() - start
        ok = (worst_oracle <= 1e-10 and worst_mc <= 0.01
              and worst_finite <= 0.01 and elapsed < 120)
        _report(capsys, 3, "blockage current", ok,
                f"max oracle error {worst_oracle:.2e}, max Monte Carlo "
                f"error {worst_mc:.2e}, max finite-size error "
                f"{worst_finite:.2e}", elapsed)
        assert ok

    def test_criterion_4_symmetry_and_recurrence(self, capsys):
        start = time.time()
        closure_ok = True
        support_ok = True
        worst_leak = 0.0
        for sites in (4, 6, 8, 10, 12):
            geo = RingGeometry(sites // 2)
            n = geo.site_count

            for config in enumerate_configurations(geo, geo.half_size):
                if not config.is_ph_symmetric():
                    continue
                engines = engines_mask(config.mask, n)
                for coin in (engines, engines & ~(1 << (n - 1))):
                    image = Configuration(geo, advance_mask(config.mask,
                                                            coin, n))
                    closure_ok = closure_ok and image.is_ph_symmetric()

            recurrent = recurrent_support_rule184(geo, 0.5)
            support_ok = (support_ok
                          and all(c.is_in_omega_inf() for c in recurrent)
                          and queue_configuration(geo) in recurrent)

            chain = build_chain(geo, geo.half_size,
                                KernelParams(p=1.0, epsilon=0.5))
            dist = stationary_distribution(chain)
            for i, config in enumerate(chain.states):
                if not config.is_ph_symmetric():
                    worst_leak = max(worst_leak,
                                     float(dist.probabilities[i]))
        elapsed = time.time() - start
        ok = closure_ok and support_ok and worst_leak <= 1e-12 and elapsed < 60
        _report(capsys, 4, "symmetry and recurrence", ok,
                f"closure holds for both coin outcomes, recurrent class "
                f"inside the free-flow set with the queue, max probability "
                f"outside symmetry {worst_leak:.2e}", elapsed)
        assert ok

    def test_criterion_5_train_counts(self, capsys):
        start = time.time()
        counts_ok = train_count_table(1, 1) == 2
        totals_ok = train_count_table(1, 1) == math.comb(2, 1)
        for L in range(2, 9):
            geo = RingGeometry(L)
            observed = Counter(c.engine_count()
                               for c in enumerate_configurations(geo, L))
            for l in range(1, L + 1):
                counts_ok = counts_ok and train_count_table(L, l) == observed[l]
            total = sum(train_count_table(L, l) for l in range(1, L + 1))
            totals_ok = totals_ok and total == math.comb(2 * L, L)
        elapsed = time.time() - start
        ok = counts_ok and totals_ok and elapsed < 60
        _report(capsys, 5, "train counts", ok,
                "table matches enumeration for all L <= 8 and sums to "
                "C(2L, L)", elapsed)
        assert ok

    def test_criterion_6_saddle_points(self, capsys):
        start = time.time()
        worst = 0.0
        for omega in (0.5, 1.0, 2.0, 3.0, 5.0, 10.0):
            root = math.sqrt(1 + omega)
            worst = max(worst, abs(maximize_saddle(omega).argmax
                                   - root / (1 + root)))
        for k in range(1, 10):
            eps = k / 10
            worst = max(worst, abs(maximize_blockage_saddle(eps).argmax
                                   - (1 - eps) / (2 - eps)))

        monotone = True
        for omega in (0.5, 1.0, 3.0, 10.0):
            for ia in range(1, 10):
                alpha = ia / 10
                grid = [(1 - alpha) * j / 40 * 0.999 for j in range(40)]
                values = [saddle_objective(alpha, a1, omega) for a1 in grid]
                monotone = monotone and all(b <= a + 1e-12
                                            for a, b in zip(values,
                                                            values[1:]))
        elapsed = time.time() - start
        ok = worst <= 1e-6 and monotone and elapsed < 60
        _report(capsys, 6, "saddle points", ok,
                f"max maximizer error {worst:.2e}, objective decreasing "
                f"in the engine fraction", elapsed)
        assert ok

    def test_criterion_7_experiment_reproduction(self, capsys):
        start = time.time()
        p_grid = parse_grid("0.001:1:0.05")
        eps_grid = parse_grid("0:1:0.05")
        assert len(p_grid) == 21 and len(eps_grid) == 21

        template = SimulationSpec(geometry=RingGeometry(500),
                                  params=KernelParams(p=1.0),
                                  replicas=4, measure_steps=500,
                                  master_seed=7)
        table = sweep(p_grid, eps_grid, template)
        assert len(table) == 441

        worst_row = 0.0
        for i, p in enumerate(p_grid):
            closed = 0.5 if p == 1.0 else current_closed_form(p / (1 - p))
            worst_row = max(worst_row,
                            abs(table[i * len(eps_grid)].mean - closed))
        worst_col = 0.0
        for j, eps in enumerate(eps_grid):
            closed = blockage_current_closed_form(eps)
            cell = table[(len(p_grid) - 1) * len(eps_grid) + j]
            worst_col = max(worst_col, abs(cell.mean - closed))

        stars = [threshold_scan(p).eps_star for p in (0.6, 0.8, 1.0)]
        curve_ok = (None not in stars
                    and all(a >= b for a, b in zip(stars, stars[1:]))
                    and abs(stars[-1] - 0.0198) <= 0.01)

        spec = replace(template,
                       params=KernelParams(p=1.0, epsilon=0.5))
        halves = density_profile(spec, bin_width=500).values
        halves_ok = (abs(halves[0] - 1 / 3) <= 0.05
                     and abs(halves[1] - 2 / 3) <= 0.05)
        spec = replace(template, params=KernelParams(p=1.0, epsilon=1.0))
        jammed = density_profile(spec, bin_width=500,
                                 mode=DensityMode.SNAPSHOT).values
        split_ok = jammed == (0.0, 1.0)

        elapsed = time.time() - start
        ok = (worst_row <= 0.01 and worst_col <= 0.01 and curve_ok
              and halves_ok and split_ok and elapsed < 1800)
        _report(capsys, 7, "experiment reproduction", ok,
                f"441-cell sweep: free-flow row error {worst_row:.2e}, "
                f"deterministic column error {worst_col:.2e}; threshold "
                f"curve {[round(s, 4) for s in stars]} non-increasing; "
                f"density halves {halves[0]:.3f}/{halves[1]:.3f}, jammed "
                f"split exact", elapsed)
        assert ok

    def test_criterion_8_semantics_divergence(self, capsys):
        start = time.time()
        geo = RingGeometry(3)

        worst_same = 0.0
        for omega in (0.5, 1.0, 10.0):
            pair = [build_chain(geo, 3, KernelParams.from_omega(omega, 0.0,
                                                                semantics))
                    for semantics in (BlockageSemantics.BERNOULLI_ATTEMPT,
                                      BlockageSemantics.RENORMALIZED_WEIGHT)]
            worst_same = max(worst_same,
                             float(abs(pair[0].matrix
                                       - pair[1].matrix).max()))

        pair = [build_chain(geo, 3, KernelParams.from_omega(10.0, 0.5,
                                                            semantics))
                for semantics in (BlockageSemantics.BERNOULLI_ATTEMPT,
                                  BlockageSemantics.RENORMALIZED_WEIGHT)]
        divergence = float(abs(pair[0].matrix - pair[1].matrix).max())
        elapsed = time.time() - start
        ok = worst_same <= 1e-12 and divergence > 0.05 and elapsed < 60
        _report(capsys, 8, "semantics divergence", ok,
                f"matrices agree to {worst_same:.2e} without a blockage "
                f"and differ by {divergence:.3f} with one", elapsed)
        assert ok
