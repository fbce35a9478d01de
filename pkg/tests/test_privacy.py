from __future__ import annotations

import math

from hypothesis import given, strategies as st
import pytest

from klac.errors import InputError
from klac.privacy import (
    brute_force_superspace_count, count_superspaces_log2, count_superspaces_log2_exact,
    entropy_metric, log2_pow_diff, mil_conventional_lower, mil_upper_exact, mil_upper_relaxed,
    privacy_report, superspace_count,
)


class TestSuperspaces:
    def test_m4_t2_k1(self):
        assert count_superspaces_log2(4, 2, 1) == pytest.approx(math.log2(7))

    def test_k_equals_T(self):
        assert count_superspaces_log2(10, 4, 4) == 0.0

    def test_m3_t2_k1(self):
        assert count_superspaces_log2(3, 2, 1) == pytest.approx(math.log2(3))

    def test_out_of_range(self):
        with pytest.raises(InputError):
            count_superspaces_log2(3, 4, 1)
        with pytest.raises(InputError):
            count_superspaces_log2(5, 2, 3)

    def test_brute_force_examples(self):
        assert brute_force_superspace_count(4, 2, 1) == 7
        assert brute_force_superspace_count(3, 3, 1) == 1
        assert brute_force_superspace_count(5, 3, 2) == 7

    def test_brute_force_refuses_large_m(self):
        with pytest.raises(InputError):
            brute_force_superspace_count(6, 2, 1)

    def test_exact_path_agrees_with_log_path(self):
        for m in (8, 20, 64):
            for T in (1, 3, 7):
                for k in range(T + 1):
                    assert count_superspaces_log2(m, T, k) == pytest.approx(
                        count_superspaces_log2_exact(m, T, k), abs=1e-9)

    def test_large_m_finite(self):
        v = count_superspaces_log2(1024, 30, 3)
        assert math.isfinite(v) and v > 0

    def test_log2_pow_diff(self):
        assert log2_pow_diff(3, 1) == pytest.approx(math.log2(6))
        assert log2_pow_diff(1024, 0) == pytest.approx(1024.0)
        with pytest.raises(InputError):
            log2_pow_diff(2, 2)


class TestEntropy:
    def test_m1000_t20_k10_close_to_approx(self):
        exact, approx = entropy_metric(1000, 20, 10)
        assert approx == 10000
        # the exact value sits about t/m (2%) below m(t-k)
        assert 0.97 * approx < exact < approx

    def test_zero_at_k_equals_t(self):
        assert entropy_metric(50, 7, 7) == (0.0, 0.0)

    def test_small(self):
        exact, approx = entropy_metric(4, 2, 1)
        assert exact == pytest.approx(math.log2(7)) and approx == 4

    @given(st.integers(2, 200), st.data())
    def test_non_increasing_in_k(self, m, data):
        t = data.draw(st.integers(1, min(m, 30)))
        vals = [entropy_metric(m, t, k)[0] for k in range(t + 1)]
        assert all(a >= b - 1e-9 for a, b in zip(vals, vals[1:]))
        assert vals[-1] == 0.0 and min(vals) >= 0


class TestMIL:
    def test_k1_is_s(self):
        for m in (2, 10, 500):
            for s in (0, 3, 9):
                assert mil_upper_exact(m, 1, s) == s

    def test_m3_k2_s1(self):
        assert mil_upper_exact(3, 2, 1) == pytest.approx(math.log2(14))

    def test_relaxation_dominates(self):
        assert mil_upper_exact(20, 3, 5) <= 5 + math.log2(3) + 2 * math.log2(2**20 - 2)

    def test_bad_input(self):
        with pytest.raises(InputError):
            mil_upper_exact(1, 2, 0)
        with pytest.raises(InputError):
            mil_upper_exact(5, 0, 0)

    def test_terms_vanish_when_k_exceeds_m(self):
        # products containing 2^m - 2^m are zero, so k beyond m adds nothing
        assert mil_upper_exact(3, 6, 0) == pytest.approx(mil_upper_exact(3, 3, 0))
        assert mil_upper_exact(3, 3, 0) == pytest.approx(math.log2(1 + 6 + 6 * 4))

    @given(st.integers(2, 60), st.integers(1, 8), st.integers(0, 20))
    def test_monotone_and_dominated(self, m, k, s):
        v = mil_upper_exact(m, k, s)
        assert v <= mil_upper_relaxed(m, k, s) + 1e-9
        assert mil_upper_exact(m + 1, k, s) >= v - 1e-9
        assert mil_upper_exact(m, k + 1, s) >= v - 1e-9
        assert mil_upper_exact(m, k, s + 1) >= v

    @given(st.integers(2, 40), st.integers(1, 6), st.integers(0, 5))
    def test_exact_against_integer_formula(self, m, k, s):
        total = 0
        for r in range(1, k + 1):
            prod = 1
            for j in range(r - 1):
                prod *= (1 << m) - (1 << (j + 1))
            total += prod
        assert mil_upper_exact(m, k, s) == pytest.approx(s + math.log2(total))

    def test_conventional_examples(self):
        assert mil_conventional_lower(9, 9) == 0
        assert mil_conventional_lower(30, 1) == 0
        assert mil_conventional_lower(4, 2) == pytest.approx(math.log2(7))
        v = mil_conventional_lower(100, 10)
        assert v >= 9 * (log2_pow_diff(100, 1) - log2_pow_diff(10, 1)) - 1e-9
        assert 800 < v < 900

    def test_separation_grid(self):
        for m in (50, 100):
            for T in (20, 30):
                for k in (1, 2, 3):
                    for s in (0, 5, 10):
                        assert mil_upper_exact(m, k, s) < mil_conventional_lower(m, T)

    def test_separation_k_small_vs_T(self):
        for s in range(11):
            assert mil_upper_exact(100, 3, s) < mil_conventional_lower(100, 30)


class TestOracle:
    @pytest.mark.parametrize("m", range(1, 6))
    def test_brute_force_matches_formula(self, m):
        for T in range(m + 1):
            for k in range(T + 1):
                assert brute_force_superspace_count(m, T, k) == superspace_count(m, T, k)


def test_report_fields():
    r = privacy_report(100, 10, 2, 5)
    row = r.as_row()
    assert row[:4] == [100, 10, 2, 5]
    assert r.mil_upper_asymptotic == pytest.approx(mil_upper_relaxed(100, 2, 5))
    assert len(row) == len(r.FIELDS) == 9
