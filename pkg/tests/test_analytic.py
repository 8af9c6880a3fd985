"""Tests for closed-form currents, finite-size sums, and saddle evaluation."""

from __future__ import annotations

import math
from fractions import Fraction

import pytest

from partasep.analytic import (
    SaddleResult,
    blockage_current_closed_form,
    blockage_current_finite_L,
    blockage_saddle_objective,
    current_closed_form,
    current_finite_L,
    entropy,
    maximize_blockage_saddle,
    maximize_saddle,
    product_form_weight,
    saddle_objective,
    _golden_max,
    _logsumexp,
)
from partasep.lattice import train_count_list


class TestClosedForms:
    def test_unit_weight(self):
        # (1/2) sqrt(2) / (1 + sqrt(2))
        assert current_closed_form(1.0) == pytest.approx(
            0.5 * math.sqrt(2.0) / (1.0 + math.sqrt(2.0)), abs=1e-15)

    def test_weight_three_is_exactly_one_third(self):
        assert current_closed_form(3.0) == pytest.approx(1.0 / 3.0, abs=1e-15)

    def test_zero_weight_rejected_and_limit_is_one_quarter(self):
        with pytest.raises(ValueError):
            current_closed_form(0.0)
        assert current_closed_form(1e-12) == pytest.approx(0.25, abs=1e-9)

    def test_large_weight_approaches_one_half(self):
        assert current_closed_form(1e12) == pytest.approx(0.5, abs=1e-5)

    def test_monotone_in_weight(self):
        values = [current_closed_form(w) for w in (0.1, 0.5, 1, 2, 5, 20, 100)]
        assert values == sorted(values)

    def test_blockage_endpoints(self):
        assert blockage_current_closed_form(0.0) == pytest.approx(0.5)
        assert blockage_current_closed_form(1.0) == 0.0

    def test_blockage_midpoint(self):
        assert blockage_current_closed_form(0.5) == pytest.approx(1.0 / 3.0)

    def test_blockage_decreasing(self):
        values = [blockage_current_closed_form(e / 10) for e in range(11)]
        assert values == sorted(values, reverse=True)


class TestFiniteSize:
    def test_three_pairs_exact(self):
        # sum l * n(l) 2^l / sum n(l) 2^l over (6, 12, 2), divided by 2L
        expected = Fraction(6 * 2 * 1 + 12 * 4 * 2 + 2 * 8 * 3,
                            (6 * 2 + 12 * 4 + 2 * 8) * 6)
        assert expected == Fraction(13, 38)
        assert current_finite_L(3, 1.0) == pytest.approx(float(expected), abs=1e-14)

    def test_two_pairs_exact(self):
        # tables (4, 2): mean engine count (4*2 + 2*4*2) / (8 + 8) = 24/16
        assert current_finite_L(2, 1.0) == pytest.approx(24 / 16 / 4, abs=1e-14)

    def test_converges_to_closed_form(self):
        for omega in (0.5, 1.0, 3.0, 10.0):
            target = current_closed_form(omega)
            gaps = [abs(current_finite_L(L, omega) - target)
                    for L in (50, 100, 200, 400)]
            assert gaps == sorted(gaps, reverse=True)
            assert gaps[-1] < 0.01

    def test_large_sizes_stay_finite(self):
        # log-space summation keeps the result stable far beyond the
        # exact-integer regime
        value = current_finite_L(5000, 4.0)
        assert abs(value - current_closed_form(4.0)) < 1e-3

    def test_blockage_smallest_ring(self):
        # L=2: the single r=1 term gives (1-eps) * 1 / ((1-eps) * 2), always 1/2
        assert blockage_current_finite_L(2, 0.5) == pytest.approx(0.5, abs=1e-14)
        assert blockage_current_finite_L(2, 0.9) == pytest.approx(0.5, abs=1e-14)

    def test_blockage_converges_to_closed_form(self):
        for eps in (0.1, 0.3, 0.5, 0.7, 0.9):
            gap = abs(blockage_current_finite_L(500, eps)
                      - blockage_current_closed_form(eps))
            assert gap < 1e-3

    def test_blockage_size_monotone_gap(self):
        eps = 0.4
        target = blockage_current_closed_form(eps)
        gaps = [abs(blockage_current_finite_L(L, eps) - target)
                for L in (50, 100, 200, 400)]
        assert gaps == sorted(gaps, reverse=True)


class TestEntropy:
    def test_endpoints_vanish(self):
        assert entropy(0.0) == 0.0
        assert entropy(1.0) == 0.0

    def test_quarter_value(self):
        assert entropy(0.25) == pytest.approx(0.5623351446188083, abs=1e-15)

    def test_symmetry(self):
        for a in (0.1, 0.3, 0.45):
            assert entropy(a) == pytest.approx(entropy(1.0 - a), abs=1e-14)

    def test_maximum_at_half(self):
        assert entropy(0.5) == pytest.approx(math.log(2.0), abs=1e-15)


class TestSaddle:
    def test_maximizer_matches_closed_form(self):
        for omega in (0.1, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 100.0):
            result = maximize_saddle(omega)
            target = math.sqrt(1.0 + omega) / (1.0 + math.sqrt(1.0 + omega))
            assert abs(result.argmax - target) < 1e-6
            assert isinstance(result, SaddleResult)

    def test_value_is_local_maximum(self):
        result = maximize_saddle(2.0)
        f = lambda a: saddle_objective(a, 0.0, 2.0)
        assert f(result.argmax) == pytest.approx(result.value, abs=1e-12)
        assert result.value >= f(result.argmax - 1e-4)
        assert result.value >= f(result.argmax + 1e-4)

    def test_objective_decreasing_in_second_argument(self):
        for omega in (0.5, 1.0, 3.0, 10.0):
            for ia in range(1, 10):
                alpha = ia / 10
                grid = [(1 - alpha) * j / 40 * 0.999 for j in range(40)]
                values = [saddle_objective(alpha, a1, omega) for a1 in grid]
                assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))

    def test_blockage_maximizer_matches_closed_form(self):
        for k in range(1, 10):
            eps = k / 10
            result = maximize_blockage_saddle(eps)
            assert abs(result.argmax - (1 - eps) / (2 - eps)) < 1e-6

    def test_blockage_peak_value_vanishes(self):
        # the exponential rate at the maximizing density is zero, which is
        # what makes the finite-size sums converge to a finite ratio
        for eps in (0.1, 0.3, 0.5, 0.7, 0.9):
            assert abs(maximize_blockage_saddle(eps).value) < 1e-12

    def test_blockage_objective_edge_conventions(self):
        assert math.isfinite(blockage_saddle_objective(0.0, 0.5))
        assert math.isfinite(blockage_saddle_objective(0.5, 0.5))


class TestNumericHelpers:
    def test_logsumexp_small_case(self):
        vals = [0.1, 0.7, -1.3]
        assert _logsumexp(vals) == pytest.approx(
            math.log(sum(math.exp(v) for v in vals)), abs=1e-14)

    def test_logsumexp_overflow_safe(self):
        assert _logsumexp([1000.0, 1000.0]) == pytest.approx(
            1000.0 + math.log(2.0), abs=1e-12)

    def test_logsumexp_empty_is_minus_infinity(self):
        assert _logsumexp([]) == -math.inf

    def test_golden_max_quadratic(self):
        argmax, value = _golden_max(lambda x: -(x - 0.3) ** 2, 0.0, 1.0, 1e-9)
        assert abs(argmax - 0.3) < 1e-8
        assert value == pytest.approx(0.0, abs=1e-15)

    def test_product_form_weight(self):
        assert product_form_weight(1, 2, 0.5) == pytest.approx(0.5)
        assert product_form_weight(2, 5, 0.5) == pytest.approx(0.25 * 0.5)
        assert product_form_weight(0, 3, 0.2) == pytest.approx(0.2 ** 3)


def test_table_collapses_to_product_form():
    # the double-sum table equals (2L / l) * C(L-1, l-1)^2; the log-space
    # evaluation path for large rings is built on this identity
    for L in range(2, 60):
        for l, count in enumerate(train_count_list(L), start=1):
            num = 2 * L * math.comb(L - 1, l - 1) ** 2
            assert num % l == 0
            assert count == num // l


def test_tables_feed_the_finite_size_sum():
    # the finite-size current is the weighted mean train count over the
    # table; recompute directly in rationals for a small size
    L, omega = 4, 2
    table = train_count_list(L)
    num = sum(l * n * (1 + omega) ** l for l, n in enumerate(table, start=1))
    den = sum(n * (1 + omega) ** l for l, n in enumerate(table, start=1))
    expected = Fraction(num, den * 2 * L)
    assert current_finite_L(L, float(omega)) == pytest.approx(
        float(expected), abs=1e-13)
