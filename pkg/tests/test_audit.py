import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracle import oracle_winners
from stvparadox.audit import (
    CountIntervalSet,
    ParadoxKind,
    PartialBallotError,
    bullet_sweep,
    complete_to_ranking,
    count_intervals,
    margin_curve,
    scan_counts,
    sweep_cap,
    verify,
    verify_negative,
    verify_positive,
)
from stvparadox.engine import EngineConfig
from stvparadox.model import Ballot, Election, Profile, add_ballots
from stvparadox.worst_case import random_profile

ABDC = Ballot([0, 1, 3, 2])
# Gillies > McCabe > MacDonald > Wallace > Findlay
BUTE_BALLOT = Ballot([1, 3, 2, 4, 0])


def test_p2_negative_at_100(p2):
    report = verify_negative(p2, ABDC, 100)
    assert report is not None
    assert report.kind is ParadoxKind.NEGATIVE
    assert report.promoted == {2} and report.displaced == {1}
    assert report.after.quota == 3367


def test_p2_no_paradox_past_range(p2):
    assert verify_negative(p2, ABDC, 3063) is None
    assert verify_negative(p2, ABDC, 21) is None
    assert verify_negative(p2, ABDC, 3062) is not None


def test_p2_positive_absent(p2):
    assert verify_positive(p2, ABDC, 100) is None


def test_bute_negative_at_26(bute):
    report = verify_negative(bute, BUTE_BALLOT, 26)
    names = bute.profile.names()
    assert {names[c] for c in report.promoted} == {"Findlay"}
    assert {names[c] for c in report.displaced} == {"McCabe"}


def test_bute_interval(bute):
    assert count_intervals(bute, BUTE_BALLOT, ParadoxKind.NEGATIVE, 100).intervals == ((26, 38),)


def test_partial_ballot_refused(p2):
    with pytest.raises(PartialBallotError):
        verify_negative(p2, Ballot([0, 1]), 10)
    with pytest.raises(PartialBallotError):
        verify_positive(p2, Ballot([0, 1, 3]), 10)


def test_single_seat_positive_fast_path(table1):
    ballot = Ballot([0, 1, 2])
    assert verify_positive(table1, ballot, 5) is None
    # the theorem-backed shortcut agrees with actually counting
    for k in (1, 26, 500, 2000):
        assert verify_positive(table1, ballot, k, check_theorem=True) is None


def test_both_kind_requires_both():
    # A wins comfortably, so more A-topped ballots cannot flip anything
    p = Profile.from_rankings("ABCD", [(10, "ABCD"), (1, "BA")])
    e = Election(p, 1)
    assert verify(e, Ballot([0, 1, 2, 3]), 3, ParadoxKind.BOTH) is None


def test_count_intervals_matches_pointwise(bute):
    found = count_intervals(bute, BUTE_BALLOT, ParadoxKind.NEGATIVE, 60)
    pointwise = [c for c in range(1, 61) if verify_negative(bute, BUTE_BALLOT, c)]
    assert found.counts() == pointwise
    assert 30 in found and 39 not in found


def test_count_intervals_rejects_zero_cap(p2):
    with pytest.raises(ValueError):
        count_intervals(p2, ABDC, ParadoxKind.NEGATIVE, 0)


def test_count_intervals_default_cap_is_electorate(table1):
    found = count_intervals(table1, Ballot([0, 1, 2]), ParadoxKind.POSITIVE)
    assert found.scan_cap == 2013
    assert not found


def test_count_interval_set_helpers():
    s = CountIntervalSet(((2, 4), (9, 9)), 10)
    assert s.counts() == [2, 3, 4, 9]
    assert 3 in s and 5 not in s
    assert not CountIntervalSet((), 10)


def test_p2_positive_scan_empty_sampled(p2):
    counts = list(range(1, 200)) + list(range(3000, 3100))
    assert scan_counts(p2, ABDC, ParadoxKind.POSITIVE, counts) == []


def test_verify_agrees_with_oracle_on_fixtures(p2, bute):
    for election, ballot, counts in ((p2, ABDC, (1, 21, 22, 100, 1500, 3062, 3063)),
                                     (bute, BUTE_BALLOT, (1, 25, 26, 38, 39, 200))):
        w0 = oracle_winners(election)
        for k in counts:
            w1 = oracle_winners(election.with_profile(add_ballots(election.profile, ballot, k)))
            expect = ballot.last not in w0 and ballot.last in w1
            assert (verify_negative(election, ballot, k) is not None) == expect, k


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9), st.integers(1, 60))
def test_reports_reverify_and_balance(seed, count):
    rng = random.Random(seed)
    n = rng.randint(3, 5)
    election = Election(random_profile(rng, n, rng.randint(5, 120)), rng.randint(1, n - 1))
    ballot = Ballot(rng.sample(range(n), n))
    config = EngineConfig(tie_seed=seed)
    for kind in ParadoxKind:
        report = verify(election, ballot, count, kind, config)
        if report is None:
            continue
        assert report.reverify(election, config)
        assert report.promoted.isdisjoint(report.displaced)
        assert len(report.promoted) == len(report.displaced) >= 1
        assert report.after.winners == (report.before.winners - report.displaced) | report.promoted


def test_sweep_cap():
    assert sweep_cap(10) == 20
    assert sweep_cap(3, 1.5) == 5
    assert sweep_cap(0) == 2
    assert sweep_cap(0, 2, 40) == 40


def test_bullet_sweep_p2_finds_a(p2):
    hits = bullet_sweep(p2, config=EngineConfig(), cap_floor=200, candidates=[0])
    assert hits and all(h.candidate == 0 for h in hits)
    first = hits[0]
    oracle_after = oracle_winners(p2.with_profile(add_ballots(p2.profile, Ballot([0]), first.count)))
    assert first.after == oracle_after != first.before
    for k in range(1, first.count):
        assert oracle_winners(p2.with_profile(add_ballots(p2.profile, Ballot([0]), k))) == first.before


def test_bullet_sweep_empty_when_everyone_wins():
    p = Profile.from_rankings("AB", [(5, "A"), (5, "B")])
    assert bullet_sweep(Election(p, 2), cap_floor=50) == []


def test_complete_to_ranking_two_candidates():
    p = Profile.from_rankings("AB", [(3, "A"), (2, "B")])
    assert complete_to_ranking(Election(p, 1), 0, 1) == [Ballot([0, 1])]


def test_complete_to_ranking_p2(p2):
    ballots = complete_to_ranking(p2, 0, 2)
    assert ABDC in ballots
    assert all(b.top == 0 and b.last == 2 and len(b) == 4 for b in ballots)
    assert ABDC in complete_to_ranking(p2, 0, 2, "exhaustive", scan_cap=40)


def test_complete_to_ranking_errors(p2, table6):
    with pytest.raises(ValueError):
        complete_to_ranking(p2, 1, 1)
    with pytest.raises(ValueError):
        complete_to_ranking(table6, 0, 4, "exhaustive", exhaustive_limit=4)
    with pytest.raises(ValueError):
        complete_to_ranking(p2, 0, 2, "clever")


def test_margin_curve_p2(p2):
    curve = margin_curve(p2, ABDC, range(22, 101), 2, 1)
    assert [k for k, _ in curve] == list(range(22, 101))
    assert all(m > 0 for _, m in curve)
    assert margin_curve(p2, ABDC, [50], 2, 1) == [curve[50 - 22]]
    with pytest.raises(ValueError):
        margin_curve(p2, ABDC, [1], 0, 9)
