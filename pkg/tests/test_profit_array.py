"""Unit tests for the max-plus exact-weight arrays and k-component tables."""

import numpy as np
import pytest

from treeknap import INFEASIBLE, KTable, ProfitArray, convolve, pointwise_max
from treeknap.profit_array import dump_array, parse_array

B = None  # BOTTOM in from_values/tolist notation


def arr(*values):
    return ProfitArray.from_values(values)


def random_array(rng, cap):
    vals = [
        B if rng.random() < 0.3 else int(rng.integers(0, 50)) for _ in range(cap + 1)
    ]
    return ProfitArray.from_values(vals)


class TestConstruction:
    def test_identity_of_capacity_3(self):
        assert ProfitArray.identity(3).tolist() == [0, B, B, B]

    def test_identity_of_capacity_0(self):
        assert ProfitArray.identity(0).tolist() == [0]

    def test_bottom_is_bottom(self):
        a = ProfitArray.bottom(2)
        assert a.tolist() == [B, B, B]
        assert a.is_bottom()
        assert not ProfitArray.identity(2).is_bottom()

    def test_from_values_tolist_round_trip(self):
        values = [3, B, 0, 7]
        assert ProfitArray.from_values(values).tolist() == values

    def test_length_and_capacity(self):
        a = ProfitArray.identity(4)
        assert len(a) == 5
        assert a.capacity == 4

    def test_getitem(self):
        a = arr(0, B, 4)
        assert a[0] == 0
        assert a[1] is None
        assert a[2] == 4

    def test_negative_values_rejected(self):
        with pytest.raises(ValueError):
            ProfitArray.from_values([-1, 0])

    def test_equality_and_copy(self):
        a = arr(0, 2, B)
        assert a == a.copy()
        assert a != arr(0, 2, 0)


class TestBestValue:
    def test_scan_finds_max_and_weight(self):
        assert arr(0, 3, 1, 6).best_value() == (6, 3)

    def test_all_bottom_is_infeasible(self):
        assert arr(B, B).best_value() is INFEASIBLE

    def test_ties_take_smallest_weight(self):
        assert arr(0, 5, 5).best_value() == (5, 1)

    def test_identity_best_is_empty_selection(self):
        assert ProfitArray.identity(5).best_value() == (0, 0)


class TestShiftAdd:
    def test_single_placement(self):
        assert ProfitArray.identity(3).shift_add(1, 2, 4).tolist() == [B, B, 4, B]

    def test_sigma_zero_is_identity(self):
        a = arr(0, 2, B, 7)
        assert a.shift_add(0, 2, 4) == a

    def test_index_by_index(self):
        assert arr(0, 2, B).shift_add(1, 1, 3).tolist() == [B, 3, 5]

    def test_weight_beyond_capacity_gives_bottom(self):
        assert arr(0, 2, 5).shift_add(1, 4, 9).is_bottom()

    def test_two_shifts_compose_into_one(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            cap = int(rng.integers(0, 12))
            a = random_array(rng, cap)
            w1, w2 = int(rng.integers(0, 4)), int(rng.integers(0, 4))
            if w1 + w2 > cap:
                continue
            p1, p2 = int(rng.integers(0, 9)), int(rng.integers(0, 9))
            twice = a.shift_add(1, w1, p1).shift_add(1, w2, p2)
            assert twice == a.shift_add(1, w1 + w2, p1 + p2)


class TestPointwiseMax:
    def test_per_entry_max(self):
        assert pointwise_max(arr(0, B, 4), arr(B, 3, 1)).tolist() == [0, 3, 4]

    def test_bottom_is_neutral(self):
        a = arr(5, B, 2)
        assert pointwise_max(a, ProfitArray.bottom(2)) == a

    def test_idempotent(self):
        a = arr(5, B, 2)
        assert pointwise_max(a, a) == a

    def test_commutative_and_associative(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            cap = int(rng.integers(0, 10))
            a, b, c = (random_array(rng, cap) for _ in range(3))
            assert pointwise_max(a, b) == pointwise_max(b, a)
            assert pointwise_max(pointwise_max(a, b), c) == pointwise_max(
                a, pointwise_max(b, c)
            )

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            pointwise_max(arr(0, 1), arr(0, 1, 2))


class TestConvolve:
    def test_identity_is_neutral(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            cap = int(rng.integers(0, 10))
            a = random_array(rng, cap)
            assert convolve(a, ProfitArray.identity(cap)) == a

    def test_enumerates_all_index_pairs(self):
        assert convolve(arr(0, 2, B), arr(0, B, 5)).tolist() == [0, 2, 5]

    def test_truncates_sums_beyond_capacity(self):
        assert convolve(arr(B, 1), arr(B, 1)).tolist() == [B, B]

    def test_matches_quadratic_definition(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            cap = int(rng.integers(0, 9))
            a, b = random_array(rng, cap), random_array(rng, cap)
            got = convolve(a, b).tolist()
            for c in range(cap + 1):
                pairs = [
                    a[c1] + b[c - c1]
                    for c1 in range(c + 1)
                    if a[c1] is not None and b[c - c1] is not None
                ]
                assert got[c] == (max(pairs) if pairs else B)

    def test_commutative_and_associative(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            cap = int(rng.integers(0, 65))
            a, b, c = (random_array(rng, cap) for _ in range(3))
            assert convolve(a, b) == convolve(b, a)
            assert convolve(convolve(a, b), c) == convolve(a, convolve(b, c))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            convolve(arr(0), arr(0, 1))


class TestKTable:
    def test_identity_rows(self):
        t = KTable.identity(2, 3)
        assert t.k == 2
        assert t.capacity == 3
        assert t.row(0).tolist() == [0, B, B, B]
        assert t.row(1).is_bottom()
        assert t.row(2).is_bottom()

    def test_bottom_rows(self):
        t = KTable.bottom(1, 2)
        assert t.row(0).is_bottom() and t.row(1).is_bottom()

    def test_shift_add_applies_to_every_row(self):
        t = KTable.identity(1, 3).shift_count(1).shift_add(1, 2, 4)
        assert t.row(0).is_bottom()
        assert t.row(1).tolist() == [B, B, 4, B]

    def test_shift_count_moves_rows_down(self):
        t = KTable.identity(2, 1).shift_count(1)
        assert t.row(0).is_bottom()
        assert t.row(1).tolist() == [0, B]
        assert t.row(2).is_bottom()

    def test_shift_count_drops_overflow(self):
        t = KTable.identity(1, 1).shift_count(2)
        assert t.row(0).is_bottom() and t.row(1).is_bottom()

    def test_shift_count_zero_is_identity(self):
        t = KTable.identity(2, 2)
        assert t.shift_count(0) == t

    def test_max_with(self):
        a = KTable.identity(1, 1)
        b = KTable.identity(1, 1).shift_count(1)
        m = a.max_with(b)
        assert m.row(0).tolist() == [0, B]
        assert m.row(1).tolist() == [0, B]


class TestDumpFormat:
    def test_dump_lines(self):
        assert dump_array(arr(0, B, 7)) == "0 0\n1 -inf\n2 7\n"

    def test_round_trip(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            a = random_array(rng, int(rng.integers(0, 12)))
            assert parse_array(dump_array(a)) == a

    def test_parse_rejects_gaps(self):
        with pytest.raises(ValueError):
            parse_array("0 1\n2 5\n")

    def test_parse_rejects_malformed_lines(self):
        with pytest.raises(ValueError):
            parse_array("0 1 2\n")
