"""Tests for execution traces and the standard and canonical constructions."""

import pytest

from heardof.analysis import deficiency_set, floss_characterization
from heardof.errors import (
    DimensionError,
    DomainError,
    IncompleteTraceError,
    ParameterError,
    RoundRangeError,
)
from heardof.executions import (
    Deliver,
    Execution,
    Next,
    Stop,
    canonical_execution,
    collection_violation,
    extract_heardof,
    first_violation,
    is_execution_of_collection,
    is_execution_of_strategy,
    local_state,
    parse_trace,
    round_deficiency,
    shifted_canonical_execution,
    standard_execution,
    strategy_violation,
    validate_execution,
)
from heardof.model import Collection, HeardOfCollection, LocalState, Ordering
from heardof.predicates import build_crashF
from heardof.strategies import f_loss, f_n_minus_F


class TestParse:
    def test_events_and_comments(self):
        text = """
        # round one
        D 1 p1 p2
        N p2   # p2 moves on
        S
        """
        t = parse_trace(text, 2, 1)
        assert t.events == (Deliver(1, 0, 1), Next(1), Stop())
        assert t.to_text() == "D 1 p1 p2\nN p2\nS"

    def test_bad_line_reports_its_number(self):
        with pytest.raises(ParameterError) as info:
            parse_trace("N p1\nX p1", 2, 1)
        assert "line 2" in str(info.value)

    def test_unknown_process(self):
        with pytest.raises(ParameterError):
            parse_trace("N p3", 2, 1)

    def test_malformed_json(self):
        with pytest.raises(ParameterError):
            Execution.from_json({"n": 2, "horizon": 1, "events": [{"kind": "jump"}]})


class TestWellFormedness:
    def test_delivery_before_sending(self):
        t = parse_trace("D 2 p1 p2\nN p1", 2, 2)
        assert first_violation(t).index == 0

    def test_duplicate_delivery(self):
        t = parse_trace("D 1 p1 p2\nD 1 p1 p2", 2, 1)
        violation = first_violation(t)
        assert violation.index == 1
        assert "duplicate" in violation.reason

    def test_nothing_after_stop(self):
        assert not validate_execution(parse_trace("S\nN p1", 2, 1))
        assert validate_execution(parse_trace("S\nS", 2, 1))

    def test_local_state(self):
        t = parse_trace("D 1 p1 p2\nN p2\nD 2 p2 p2", 2, 2)
        assert local_state(t, 1, 0) == LocalState(1)
        assert local_state(t, 1, 3) == LocalState.of(2, (1, 0), (2, 1))
        with pytest.raises(RoundRangeError):
            local_state(t, 1, 4)


class TestStandardExecution:
    def test_total_collection(self):
        c = Collection.total(2, 1)
        f = f_n_minus_F(2, 0)
        t = standard_execution(f, c)
        assert len(t) == 6
        assert t.events[-2:] == (Next(0), Next(1))
        assert is_execution_of_collection(t, c)
        assert is_execution_of_strategy(t, f)
        assert extract_heardof(t) == HeardOfCollection(2, 1, ((3, 3),))

    def test_blocked_process_stops_the_trace(self):
        c = Collection(2, 1, ((1, 3),))
        t = standard_execution(f_n_minus_F(2, 0), c)
        assert t.events[-1] == Stop()
        assert t.nexts(0) == 0 and t.nexts(1) == 1
        with pytest.raises(IncompleteTraceError) as info:
            extract_heardof(t)
        assert info.value.process == 0

    def test_every_crash_member_is_executed(self):
        f = f_n_minus_F(3, 1)
        for c in build_crashF(3, 2, 1):
            t = standard_execution(f, c)
            assert collection_violation(t, c) is None
            assert strategy_violation(t, f) is None
            extract_heardof(t)

    def test_orderings_agree_on_the_heard_of_collection(self):
        f = f_n_minus_F(3, 1)
        for c in build_crashF(3, 2, 1):
            forward = extract_heardof(standard_execution(f, c, Ordering.FORWARD))
            backward = extract_heardof(standard_execution(f, c, Ordering.REVERSED))
            assert forward == backward

    def test_lookahead_strategy_gets_next_round_messages(self):
        c = Collection(2, 1, ((1, 3),))
        t = standard_execution(f_loss(2), c)
        assert Deliver(2, 1, 0) in t.events
        assert is_execution_of_strategy(t, f_loss(2))
        assert extract_heardof(t).rows == ((1, 3),)

    def test_universe_mismatch(self):
        with pytest.raises(DimensionError):
            standard_execution(f_n_minus_F(3, 0), Collection.total(2, 1))


class TestStrategyViolations:
    def test_next_outside_the_strategy(self):
        t = parse_trace("N p1", 2, 1)
        violation = strategy_violation(t, f_n_minus_F(2, 0))
        assert violation.index == 0

    def test_unfair_end(self):
        t = parse_trace("D 1 p1 p1\nD 1 p2 p1", 2, 1)
        violation = strategy_violation(t, f_n_minus_F(2, 0))
        assert violation.index == len(t)
        assert "fairness" in violation.reason

    def test_collection_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            collection_violation(Execution(2, 1), Collection.total(2, 2))

    def test_missing_delivery(self):
        t = parse_trace("N p1\nN p2", 2, 1)
        violation = collection_violation(t, Collection.total(2, 1))
        assert violation.index == 2
        assert "missing delivery" in violation.reason


class TestCanonical:
    def test_extracts_its_heard_of_collection(self):
        ho = HeardOfCollection(2, 2, ((1, 3), (3, 2)))
        t = canonical_execution(ho)
        assert validate_execution(t)
        assert extract_heardof(t) == ho
        # late messages are still delivered
        assert Deliver(1, 1, 0) in t.events
        assert Deliver(2, 0, 1) in t.events

    def test_reversed_ordering_extracts_the_same_collection(self):
        ho = HeardOfCollection(2, 2, ((1, 3), (3, 2)))
        assert extract_heardof(canonical_execution(ho, Ordering.REVERSED)) == ho

    def test_rejects_non_collections(self):
        with pytest.raises(ParameterError):
            canonical_execution(((3, 3),))


class TestShiftedCanonical:
    def test_is_an_execution_of_floss(self):
        ho = HeardOfCollection(2, 1, ((1, 3),))
        t = shifted_canonical_execution(ho)
        assert t.events[:6] == (
            Deliver(1, 0, 0),
            Deliver(1, 0, 1),
            Deliver(1, 1, 1),
            Next(1),
            Deliver(2, 1, 0),
            Next(0),
        )
        assert validate_execution(t)
        assert is_execution_of_strategy(t, f_loss(2))
        assert extract_heardof(t) == ho

    def test_single_loss_per_round(self):
        ho = HeardOfCollection(3, 2, ((3, 7, 7), (7, 7, 7)))
        assert round_deficiency(ho, 1) == 1
        assert extract_heardof(shifted_canonical_execution(ho)) == ho

    def test_two_losses_in_a_round_are_out_of_domain(self):
        ho = HeardOfCollection(3, 1, ((3, 3, 7),))
        with pytest.raises(DomainError):
            shifted_canonical_execution(ho)

    def test_short_process_must_catch_up(self):
        ho = HeardOfCollection(2, 2, ((1, 3), (1, 3)))
        assert round_deficiency(ho, 2) == 1
        with pytest.raises(DomainError, match="p1 misses a message at round 1"):
            shifted_canonical_execution(ho)

    def test_domain_is_the_floss_characterization(self):
        reachable = floss_characterization(2, 2)
        for ho in deficiency_set(2, 2):
            if ho in reachable:
                assert extract_heardof(shifted_canonical_execution(ho)) == ho
            else:
                with pytest.raises(DomainError):
                    shifted_canonical_execution(ho)
