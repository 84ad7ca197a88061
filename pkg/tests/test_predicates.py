"""Tests for delivered-predicate builders, operators and structural properties."""

import pytest

from heardof.errors import DimensionError, EmptyPredicateError, EnumerationCapError, ParameterError
from heardof.expr import CrashF, Total
from heardof.model import Collection, DeliveredCollection, kernel_mask
from heardof.parser import parse_expr
from heardof.predicates import (
    DeliveredPredicate,
    build_crash1,
    build_crash1_at,
    build_crashF,
    build_expr,
    build_literal,
    build_lossL,
    build_total,
    combine_pred,
    common_prefix_gap,
    common_round_gap,
    compositions,
    describe_gap,
    has_common_prefix,
    has_common_round,
    is_prefix_symmetric,
    is_round_symmetric,
    repeat_pred,
    succeed_pred,
    union_pred,
)


class TestBuilders:
    def test_total_is_a_singleton(self):
        p = build_total(3, 2)
        assert len(p) == 1
        assert p.has_total()
        assert p.expr == Total()

    def test_crash1_at_counts(self):
        assert len(build_crash1_at(2, 2, 1)) == 9
        assert len(build_crash1_at(3, 2, 2)) == 22
        assert len(build_crash1_at(3, 2, 1)) == 25

    def test_crash1_at_round_out_of_range(self):
        with pytest.raises(ParameterError):
            build_crash1_at(3, 2, 3)

    def test_crash1_at_shape(self):
        for c in build_crash1_at(3, 3, 2):
            assert c.rows[0] == (7, 7, 7)
            sigma = c.rows[2][0]
            assert c.rows[2] == (sigma,) * 3
            assert all(mask & sigma == sigma for mask in c.rows[1])

    def test_crashF_counts(self):
        assert len(build_crashF(3, 2, 1)) == 43
        assert len(build_crashF(2, 1, 1)) == 7
        assert len(build_crashF(3, 2, 0)) == 1

    def test_crashF_one_fault_is_union_of_single_crashes(self):
        assert build_crashF(3, 2, 1).tables == build_crash1(3, 2).tables

    def test_crashF_keeps_extendable_prefixes_only(self):
        n, faults = 3, 1
        for rows in build_crashF(n, 2, faults).tables:
            assert kernel_mask(rows, 2).bit_count() >= n - faults
            assert all(m & kernel_mask(rows, 1) == m for m in rows[1])

    def test_crashF_fault_range(self):
        with pytest.raises(ParameterError):
            build_crashF(3, 2, 4)

    def test_lossL_counts(self):
        assert len(build_lossL(3, 2, 1)) == 19
        assert len(build_lossL(2, 1, 0)) == 1
        assert len(build_lossL(2, 1, 4)) == 16

    def test_cap_is_enforced(self):
        with pytest.raises(EnumerationCapError) as info:
            build_crashF(3, 2, 1, cap=100)
        assert info.value.cap == 100
        assert "HEARDOF_CAP" in str(info.value)

    def test_cap_from_environment(self, monkeypatch):
        monkeypatch.setenv("HEARDOF_CAP", "10")
        with pytest.raises(EnumerationCapError):
            build_lossL(3, 2, 1)

    def test_invalid_shape(self):
        with pytest.raises(ParameterError):
            build_total(0, 2)

    def test_empty_literal(self):
        with pytest.raises(EmptyPredicateError):
            build_literal([])


class TestPredicate:
    def test_members_are_sorted_and_indexed(self):
        p = build_crash1_at(2, 2, 1)
        members = list(p)
        assert [c.rows for c in members] == sorted(p.tables)
        assert p.member(0) == members[0]
        assert isinstance(members[0], DeliveredCollection)
        with pytest.raises(ParameterError):
            p.member(len(p))

    def test_json_round_trip(self):
        p = build_lossL(2, 1, 1)
        again = DeliveredPredicate.from_json(p.to_json())
        assert again == p
        assert p.to_json()["expr"] == "loss(1)"

    def test_mixed_shapes_rejected(self):
        with pytest.raises(DimensionError):
            build_literal([Collection.total(2, 1), Collection.total(2, 2)])

    def test_delivered_sets_and_prefixes(self):
        p = build_crash1_at(2, 1, 1)
        assert p.delivered_sets() == {1, 2, 3}
        assert p.prefixes(1) == {(1,), (2,), (3,)}


class TestOperators:
    def test_union(self):
        p = union_pred(build_crash1_at(3, 2, 1), build_crash1_at(3, 2, 2))
        assert len(p) == 43

    def test_union_shape_mismatch(self):
        with pytest.raises(DimensionError):
            union_pred(build_total(3, 2), build_total(2, 2))

    def test_combination_with_total_is_identity(self):
        p = build_lossL(3, 2, 1)
        assert combine_pred(p, build_total(3, 2)).tables == p.tables

    def test_combination_of_losses_adds_losses(self):
        one = build_lossL(2, 1, 1)
        assert combine_pred(one, one).tables == build_lossL(2, 1, 2).tables

    def test_succession_with_total(self):
        crash = build_crashF(3, 2, 1)
        p = succeed_pred(crash, build_total(3, 2))
        assert crash.tables <= p.tables
        # a crash in round 1 followed by recovery in round 2
        assert ((3, 3, 3), (7, 7, 7)) in p.tables

    def test_succession_of_total_is_total(self):
        total = build_total(2, 3)
        assert succeed_pred(total, total).tables == total.tables

    def test_repetition_contains_operand(self):
        p = build_crash1_at(2, 2, 1)
        repeated = repeat_pred(p)
        assert p.tables <= repeated.tables
        assert ((1, 1), (2, 2)) in repeated.tables

    def test_compositions(self):
        assert sorted(compositions(3)) == [(1, 1, 1), (1, 2), (2, 1), (3,)]
        assert list(compositions(0)) == [()]

    def test_build_expr_matches_direct_builders(self):
        assert build_expr(parse_expr("crash(1)"), 3, 2).tables == build_crashF(3, 2, 1).tables
        assert build_expr(parse_expr("crash(1)"), 3, 2).expr == CrashF(1)
        recover = build_expr(parse_expr("crash(1) ~> total"), 2, 2)
        assert recover.tables == succeed_pred(build_crashF(2, 2, 1), build_total(2, 2)).tables

    def test_combination_of_single_crashes(self):
        single = build_crashF(3, 2, 1)
        assert combine_pred(single, single).tables == build_crashF(3, 2, 2).tables


class TestProperties:
    def test_crash_is_symmetric_with_common_round(self):
        p = build_crashF(3, 2, 1)
        assert is_round_symmetric(p)
        assert is_prefix_symmetric(p)
        assert has_common_round(p)

    def test_loss_has_no_common_round(self):
        p = build_lossL(3, 2, 1)
        gap = common_round_gap(p)
        assert gap is not None
        assert not has_common_prefix(p)
        assert common_prefix_gap(p) is not None

    def test_common_round_requires_total(self):
        c = Collection(2, 1, ((1, 1),))
        p = build_literal([c])
        assert common_round_gap(p) == {"missing": "total collection"}

    def test_total_has_every_property(self):
        p = build_total(3, 2)
        assert has_common_round(p) and has_common_prefix(p)

    def test_describe_gap(self):
        shown = describe_gap({"round": 2, "process": 0, "set": 3, "prefix": [7, 3]})
        assert shown == {"round": 2, "process": "p1", "set": "{p1,p2}", "prefix": ["{p1,p2,p3}", "{p1,p2}"]}
