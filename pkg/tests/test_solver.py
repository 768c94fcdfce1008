"""Switch-rate solver tests.

Fourteen frozen (imbalance, mean) reference pairs are pinned to five
decimal places; everything else is checked against structural properties
(monotone residual, bracketing, asymptote) or independent oracles (dense
scans, polynomial root extraction, the finite-crowd/large-crowd limit).
"""

import numpy as np
import pytest

from mgstrat.solver import (
    ASYMPTOTIC_GAP,
    LambdaTable,
    NumericError,
    default_delta_max,
    finite_m_balance,
    indifference_residual,
    lambda_gap,
    solve_lambda,
    solve_p_finite,
)

# Frozen reference roots, five decimal places.
REFERENCE_ROOTS = {
    1: 1.14619,
    2: 2.15592,
    3: 3.15942,
    4: 4.16121,
    5: 5.16229,
    6: 6.16302,
    7: 7.16354,
    8: 8.16393,
    9: 9.16423,
    10: 10.16448,
    20: 20.16557,
    30: 30.16594,
    40: 40.16612,
    50: 50.16623,
}


class TestIndifferenceResidual:
    def test_zero_at_reference_root_delta_1(self):
        assert abs(indifference_residual(1.14619, 1)) < 2e-5

    def test_zero_at_reference_root_delta_10(self):
        assert abs(indifference_residual(10.16448, 10)) < 2e-5

    def test_small_mean_limit_is_plus_one(self):
        assert indifference_residual(1e-12, 1) == pytest.approx(1.0, abs=1e-9)

    def test_strictly_decreasing_with_single_sign_change(self):
        for delta in range(1, 101):
            grid = np.linspace(delta / 2, delta + 2, 61)
            values = [indifference_residual(x, delta) for x in grid]
            assert all(b < a for a, b in zip(values, values[1:]))
            signs = np.sign(values)
            flips = np.nonzero(np.diff(signs) != 0)[0]
            assert len(flips) == 1

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            indifference_residual(1.0, 0)
        with pytest.raises(ValueError):
            indifference_residual(-2.0, 3)


class TestSolveLambda:
    def test_reference_table_to_five_decimals(self):
        for delta, expected in REFERENCE_ROOTS.items():
            assert solve_lambda(delta, 1e-10) == pytest.approx(expected, abs=1e-5)

    def test_explicit_examples(self):
        assert solve_lambda(1, 1e-10) == pytest.approx(1.14619, abs=1e-5)
        assert solve_lambda(5, 1e-10) == pytest.approx(5.16229, abs=1e-5)
        assert solve_lambda(50, 1e-10) == pytest.approx(50.16623, abs=1e-5)

    def test_residual_below_tolerance(self):
        for delta in (1, 7, 33, 200):
            root = solve_lambda(delta, 1e-10)
            assert abs(indifference_residual(root, delta)) < 1e-10

    def test_root_inside_unit_bracket(self):
        for delta in (1, 2, 9, 64, 500):
            root = solve_lambda(delta)
            assert delta < root < delta + 1

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            solve_lambda(0)
        with pytest.raises(ValueError):
            solve_lambda(3, tolerance=-1e-9)


class TestLambdaGap:
    def test_reference_gaps(self):
        assert lambda_gap(1) == pytest.approx(0.14619, abs=1e-5)
        assert lambda_gap(50) == pytest.approx(0.16623, abs=1e-5)

    def test_gap_500_near_asymptote(self):
        assert abs(lambda_gap(500) - 1.0 / 6.0) < 2e-4

    def test_strictly_increasing_and_bounded_to_1000(self):
        gaps = [lambda_gap(delta) for delta in range(1, 1001)]
        assert all(b > a for a, b in zip(gaps, gaps[1:]))
        assert max(gaps) < 1.0 / 6.0 + 1e-3


class TestSolvePFinite:
    def test_small_case_matches_cubic_root(self):
        # With imbalance 1 and crowd parameter 2 the balance reduces to a
        # cubic in p; take its (0,1) root from an independent polynomial
        # solver: 3p^2(1-p) + p^3 = (1-p)^3  <=>  p^3 - 3p + 1 = 0.
        roots = np.roots([1.0, 0.0, -3.0, 1.0])
        oracle = next(
            float(r.real) for r in roots if abs(r.imag) < 1e-12 and 0 < r.real < 1
        )
        assert solve_p_finite(1, 2, 1e-12) == pytest.approx(oracle, abs=1e-9)

    def test_small_case_matches_dense_scan(self):
        # Second, scan-based oracle: locate the sign change of the exact
        # three-trial balance on a fine grid and refine once.
        p = np.linspace(1e-6, 1 - 1e-6, 2_000_001)
        balance = (3 * p**2 * (1 - p) + p**3) - (1 - p) ** 3
        k = int(np.nonzero(np.diff(np.sign(balance)) != 0)[0][0])
        assert solve_p_finite(1, 2, 1e-12) == pytest.approx(float(p[k]), abs=1e-6)

    def test_large_crowd_approaches_poisson_limit(self):
        m = 10**6
        p = solve_p_finite(1, m, 1e-12)
        assert p * (m + 2) == pytest.approx(solve_lambda(1), abs=1e-3)

    def test_residual_at_root(self):
        for delta, m in ((1, 2), (2, 50), (3, 10**4)):
            p = solve_p_finite(delta, m, 1e-12)
            assert abs(finite_m_balance(p, delta, m)) < 1e-12

    def test_monotone_convergence_to_limit(self):
        for delta in (1, 2, 3):
            limit = solve_lambda(delta)
            errors = []
            for m in (10**2, 10**3, 10**4, 10**5):
                p = solve_p_finite(delta, m, 1e-12)
                errors.append(abs(p * (m + delta + 1) - limit))
            assert all(b < a for a, b in zip(errors, errors[1:]))

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            solve_p_finite(0, 5)
        with pytest.raises(ValueError):
            solve_p_finite(3, 2)
        with pytest.raises(ValueError):
            finite_m_balance(0.5, 1, 0)


class TestLambdaTable:
    def test_entries_satisfy_residual_bound(self):
        table = LambdaTable(delta_max=40, tolerance=1e-10)
        for delta, lam in table.entries.items():
            assert abs(indifference_residual(lam, delta)) < table.tolerance

    def test_lookup_exact_below_and_asymptote_above(self):
        table = LambdaTable(delta_max=12)
        assert table.lookup(3) == solve_lambda(3)
        assert table.lookup(13) == 13 + ASYMPTOTIC_GAP
        assert table.lookup(500) == 500 + ASYMPTOTIC_GAP

    def test_gap_above_zero_and_increasing(self):
        table = LambdaTable(delta_max=30)
        gaps = [table.entries[d] - d for d in range(1, 31)]
        assert all(g > 0 for g in gaps)
        assert all(b > a for a, b in zip(gaps, gaps[1:]))

    def test_asymptote_error_small_at_table_edge(self):
        # The fallback jump at delta_max+1 is far below simulation noise.
        table = LambdaTable(delta_max=60)
        exact = solve_lambda(61)
        assert abs(table.lookup(61) - exact) < 1e-3

    def test_default_depth_covers_typical_population(self):
        assert default_delta_max(2001) >= 3 * 44
        with pytest.raises(ValueError):
            default_delta_max(0)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            LambdaTable(delta_max=0)
        with pytest.raises(ValueError):
            LambdaTable(delta_max=5).lookup(0)


class TestNumericErrorPath:
    def test_error_type_is_arithmetic(self):
        assert issubclass(NumericError, ArithmeticError)
