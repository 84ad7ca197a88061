"""Tests for the ground types: process sets, collections, local states."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from heardof.errors import DimensionError, ParameterError, RoundRangeError
from heardof.model import (
    Collection,
    DeliveredCollection,
    HeardOfCollection,
    LocalState,
    Message,
    Ordering,
    ProcessId,
    ProcessSet,
    after_view,
    combine_collections,
    concat_collections,
    cons_view,
    format_mask,
    kernel,
    masks_with_min_size,
    obliv_view,
    parse_process,
    submasks,
)


def tables(n: int, horizon: int):
    mask = st.integers(min_value=0, max_value=(1 << n) - 1)
    row = st.tuples(*[mask] * n)
    return st.tuples(*[row] * horizon)


class TestProcessSet:
    def test_display_names(self):
        assert str(ProcessSet.of(0, 2)) == "{p1,p3}"
        assert str(ProcessSet()) == "{}"
        assert [p.name for p in ProcessSet.of(1, 2)] == ["p2", "p3"]

    def test_set_operations(self):
        a, b = ProcessSet.of(0, 1), ProcessSet.of(1, 2)
        assert a & b == ProcessSet.of(1)
        assert a | b == ProcessSet.universe(3)
        assert a - b == ProcessSet.of(0)
        assert ProcessSet.of(1).issubset(a)
        assert not a.issubset(b)
        assert len(ProcessSet.universe(4)) == 4

    def test_membership_and_fit(self):
        s = ProcessSet.of(2)
        assert 2 in s and 0 not in s
        assert s.fits(3) and not s.fits(2)

    def test_json_round_trip(self):
        s = ProcessSet.of(0, 3)
        assert s.to_json() == [0, 3]
        assert ProcessSet.from_json([0, 3]) == s

    def test_negative_ids_rejected(self):
        with pytest.raises(ParameterError):
            ProcessId(-1)
        with pytest.raises(ParameterError):
            ProcessSet(-2)


def test_submasks_empty_first_and_complete():
    subs = list(submasks(0b101))
    assert subs == [0b000, 0b001, 0b100, 0b101]


def test_masks_with_min_size():
    assert masks_with_min_size(3, 2) == [3, 5, 6, 7]
    assert len(masks_with_min_size(3, 0)) == 8


def test_parse_process():
    assert parse_process("p2", 3) == 1
    with pytest.raises(ParameterError):
        parse_process("p4", 3)
    with pytest.raises(ParameterError):
        parse_process("q1", 3)


class TestCollection:
    def test_total(self):
        c = Collection.total(3, 2)
        assert c.is_total()
        assert c.get(2, 1) == ProcessSet.universe(3)

    def test_shape_is_validated(self):
        with pytest.raises(DimensionError):
            Collection(2, 2, ((3, 3),))
        with pytest.raises(DimensionError):
            Collection(2, 1, ((3, 4),))
        with pytest.raises(ParameterError):
            Collection(0, 1, ((),))

    def test_round_range(self):
        c = Collection.total(2, 2)
        with pytest.raises(RoundRangeError):
            c.mask(3, 0)
        with pytest.raises(IndexError):
            c.mask(0, 0)

    def test_kinds_compare_separately(self):
        rows = ((3, 1),)
        assert DeliveredCollection(2, 1, rows) != HeardOfCollection(2, 1, rows)
        assert DeliveredCollection(2, 1, rows) == DeliveredCollection(2, 1, rows)

    def test_column_and_truncate(self):
        c = Collection(2, 2, ((3, 1), (2, 3)))
        assert c.column(1) == (1, 3)
        assert c.column(0, 1) == (3,)
        assert c.truncate(1).rows == ((3, 1),)

    def test_str_uses_display_names(self):
        c = Collection(2, 1, ((3, 1),))
        assert str(c) == "r1 p1:{p1,p2} p2:{p1}"

    @given(tables(3, 2))
    def test_json_round_trip(self, rows):
        c = HeardOfCollection(3, 2, rows)
        assert HeardOfCollection.from_json(c.to_json()) == c

    def test_kernel(self):
        c = Collection(3, 1, ((7, 3, 6),))
        assert kernel(c, 1) == ProcessSet.of(1)


class TestOperations:
    def test_combine_is_pointwise_intersection(self):
        c1 = Collection(2, 1, ((3, 1),))
        c2 = Collection(2, 1, ((2, 3),))
        assert combine_collections(c1, c2).rows == ((2, 1),)

    def test_combine_shape_mismatch(self):
        with pytest.raises(DimensionError):
            combine_collections(Collection.total(2, 1), Collection.total(2, 2))

    @given(tables(2, 2))
    def test_combine_with_total_is_identity(self, rows):
        c = Collection(2, 2, rows)
        assert combine_collections(c, Collection.total(2, 2)) == c

    def test_concat(self):
        c1 = Collection(2, 2, ((1, 1), (2, 2)))
        c2 = Collection(2, 2, ((3, 0), (0, 3)))
        assert concat_collections(c1, 1, c2).rows == ((1, 1), (3, 0))
        assert concat_collections(c1, 0, c2) == c2
        assert concat_collections(c1, 2, c2) == c1

    def test_concat_cut_out_of_range(self):
        c = Collection.total(2, 2)
        with pytest.raises(RoundRangeError):
            concat_collections(c, 3, c)


class TestLocalState:
    def test_views(self):
        q = LocalState.of(2, (1, 0), (2, 0), (2, 1), (3, 2))
        assert obliv_view(q) == ProcessSet.of(0, 1)
        assert after_view(q) == ProcessSet.of(2)
        assert Message(3, 2) not in cons_view(q).mes
        assert q.heard(3) == (1, 3, 4)

    def test_invalid_round(self):
        with pytest.raises(ParameterError):
            LocalState(0)


def test_ordering_arrange():
    assert Ordering.FORWARD.arrange([3, 1, 2]) == [1, 2, 3]
    assert Ordering.REVERSED.arrange([3, 1, 2]) == [3, 2, 1]


def test_format_mask():
    assert format_mask(0b110) == "{p2,p3}"
