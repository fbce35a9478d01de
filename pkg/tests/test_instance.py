from __future__ import annotations

import random

from hypothesis import given, settings, strategies as st
import pytest

from klac.errors import CompletionRejected, InputError
from klac.gf2 import BitMatrix, rank, solve_row, support
from klac.instance import (
    IndexCodingInstance, build_fitting_matrix, complete, format_instance, instance_from_rows,
    parse_instance, random_coefficient_instance, random_setup, random_spanning_coefficients,
)
from conftest import bm


class TestFittingMatrix:
    def test_fig1(self, fig1_instance):
        fm = build_fitting_matrix(fig1_instance)
        assert fm.known == bm("10000", "01000", "00100", "00010")
        assert fm.star_mask == bm("01000", "10000", "00010", "00100")

    def test_single_client(self):
        fm = build_fitting_matrix(instance_from_rows([1], [[]], m=2))
        assert fm.known == bm("10") and fm.star_mask == bm("00")

    def test_no_side_info(self):
        fm = build_fitting_matrix(instance_from_rows([1, 2, 3], [[], [], []], m=3))
        assert fm.known == BitMatrix.identity(3)
        assert fm.star_mask == BitMatrix.zeros(3, 3)

    @given(st.data())
    def test_injective(self, data):
        m = data.draw(st.integers(2, 6))
        def inst():
            n = data.draw(st.integers(1, m))
            reqs = [data.draw(st.integers(0, m - 1)) for _ in range(n)]
            side = [frozenset(data.draw(st.sets(st.integers(0, m - 1)))) - {q} for q in reqs]
            return IndexCodingInstance(m, n, tuple(reqs), tuple(side))
        a, b = inst(), inst()
        if a != b:
            fa, fb = build_fitting_matrix(a), build_fitting_matrix(b)
            assert (fa.known, fa.star_mask) != (fb.known, fb.star_mask)


class TestInstanceValidation:
    def test_m_at_least_n(self):
        with pytest.raises(InputError):
            instance_from_rows([1, 2, 1], [[], [], []], m=2)

    def test_request_not_in_side_info(self):
        with pytest.raises(InputError):
            instance_from_rows([1], [[1]], m=2)


class TestComplete:
    def test_fig1_all_stars_one_rejected(self, fig1_instance):
        fm = build_fitting_matrix(fig1_instance)
        G = bm("11000", "11000", "00110", "00110")
        with pytest.raises(CompletionRejected):
            complete(fm, "external", G)

    def test_fig1_zeros(self, fig1_instance):
        setup = complete(build_fitting_matrix(fig1_instance), "zeros")
        assert setup.G == bm("10000", "01000", "00100", "00010")
        assert setup.T == 4

    def test_no_side_info(self):
        setup = complete(build_fitting_matrix(instance_from_rows([1, 2, 3], [[], [], []], m=3)))
        assert setup.G == setup.A == BitMatrix.identity(3)

    def test_external_pattern_violation(self, fig1_instance):
        fm = build_fitting_matrix(fig1_instance)
        with pytest.raises(InputError):
            complete(fm, "external", bm("10100", "01000", "00100", "00010"))

    def test_fig1_optimal_code(self, fig1_instance):
        # the two-transmission code b1+b2, b3+b4 written as a completion
        G = bm("11000", "11000", "00110", "00110")
        fm = build_fitting_matrix(fig1_instance)
        with pytest.raises(CompletionRejected):
            complete(fm, "external", G)
        # a distinct-row completion of the same pattern is accepted
        setup = complete(fm, "external", bm("11000", "01000", "00110", "00010"))
        assert setup.T == rank(setup.G) == 4

    def test_unknown_policy(self, fig1_instance):
        with pytest.raises(InputError):
            complete(build_fitting_matrix(fig1_instance), "ones")

    @settings(max_examples=30)
    @given(st.integers(2, 6), st.integers(0, 2**32))
    def test_setup_invariants(self, T, seed):
        rng = random.Random(seed)
        n = rng.randint(T, (1 << T) - 1)
        inst, setup = random_setup(T, n, max(n, T) + 3, rng)
        assert rank(setup.A) == setup.T == rank(setup.G) == T
        assert len(set(setup.G.rows)) == n
        fm = build_fitting_matrix(inst)
        for g, k, s, q in zip(setup.G.rows, fm.known.rows, fm.star_mask.rows, inst.requests):
            assert g & k == k and g & ~s == k  # request bit set, nothing outside q and S
            assert q in support(g, inst.m)
        for g, d in zip(setup.G.rows, setup.coefficients().rows):
            assert solve_row(setup.A, g) == d


class TestTextFormat:
    def test_round_trip(self, fig1_instance):
        text = format_instance(fig1_instance)
        assert text.splitlines()[0] == "5 4"
        assert text.splitlines()[1] == "1 : 2"
        assert parse_instance(text) == fig1_instance

    def test_empty_side_info(self):
        inst = parse_instance("2 1\n1 :\n")
        assert inst.side_info == (frozenset(),)

    @pytest.mark.parametrize("text", ["", "2\n", "2 2\n1 : 2\n", "2 1\n1 2\n", "2 1\nx : 1\n"])
    def test_malformed(self, text):
        with pytest.raises(InputError):
            parse_instance(text)


class TestRandomCoefficients:
    def test_t2_n3_is_all_vectors(self):
        assert sorted(random_coefficient_instance(2, 3, 5).rows) == [1, 2, 3]

    def test_t4_n15_exhaustive(self):
        assert sorted(random_coefficient_instance(4, 15, 1).rows) == list(range(1, 16))

    def test_seeded_reproducible(self):
        a = random_coefficient_instance(20, 400, 7)
        b = random_coefficient_instance(20, 400, 7)
        assert a == b and len(set(a.rows)) == 400 and 0 not in a.rows

    def test_too_many(self):
        with pytest.raises(InputError):
            random_coefficient_instance(3, 8, 0)

    def test_spanning(self):
        D = random_spanning_coefficients(6, 6, random.Random(0))
        assert rank(D) == 6
