"""Detect and certify negative/positive involvement paradoxes.

Everything here works by adding ``count`` identical ballots to an election
and re-running the count. A negative involvement paradox turns the
candidate ranked last on the added ballots into a winner; a positive one
turns the candidate ranked first into a loser.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .engine import EngineConfig, EventKind, TabulationRecord, penultimate_margin, tabulate
from .model import Ballot, Election, add_ballots, bullet_counts

DEFAULT_EXHAUSTIVE_LIMIT = 8


class ParadoxKind(str, enum.Enum):
    NEGATIVE = "negative"
    POSITIVE = "positive"
    BOTH = "both"


class PartialBallotError(ValueError):
    """Raised when verification is asked about a ballot that does not rank every candidate."""


@dataclass(frozen=True)
class ParadoxReport:
    kind: ParadoxKind
    added_ballot: Ballot
    count: int
    promoted: frozenset[int]
    displaced: frozenset[int]
    before: TabulationRecord
    after: TabulationRecord
    method: str = "verify"

    def reverify(self, election: Election, config: EngineConfig) -> bool:
        """Re-run both counts and compare against the stored winner sets."""
        b = tabulate(election, config).winners
        a = tabulate(_perturbed(election, self.added_ballot, self.count), config).winners
        return b == self.before.winners and a == self.after.winners


@dataclass(frozen=True)
class CountIntervalSet:
    intervals: tuple[tuple[int, int], ...]
    scan_cap: int

    def __bool__(self):
        return bool(self.intervals)

    def __contains__(self, count: int) -> bool:
        return any(lo <= count <= hi for lo, hi in self.intervals)

    def counts(self) -> list[int]:
        return [c for lo, hi in self.intervals for c in range(lo, hi + 1)]


@dataclass(frozen=True)
class SweepHit:
    candidate: int
    count: int
    before: frozenset[int]
    after: frozenset[int]


def _perturbed(election: Election, ballot: Ballot, count: int) -> Election:
    return election.with_profile(add_ballots(election.profile, ballot, count))


def _check_full(election: Election, ballot: Ballot):
    if len(ballot) != election.n:
        raise PartialBallotError(
            f"added ballot ranks {len(ballot)} of {election.n} candidates; "
            "involvement checks need a complete ranking"
        )


def _classify(ballot: Ballot, before: frozenset[int], after: frozenset[int]) -> ParadoxKind | None:
    negative = ballot.last not in before and ballot.last in after
    positive = ballot.top in before and ballot.top not in after
    if negative and positive:
        return ParadoxKind.BOTH
    if negative:
        return ParadoxKind.NEGATIVE
    if positive:
        return ParadoxKind.POSITIVE
    return None


def _verify(election, ballot, count, config, before=None) -> ParadoxReport | None:
    ballot = ballot if isinstance(ballot, Ballot) else Ballot(ballot)
    _check_full(election, ballot)
    before = before or tabulate(election, config)
    after = tabulate(_perturbed(election, ballot, count), config)
    kind = _classify(ballot, before.winners, after.winners)
    if kind is None:
        return None
    return ParadoxReport(
        kind, ballot, count,
        promoted=after.winners - before.winners,
        displaced=before.winners - after.winners,
        before=before, after=after,
    )


def verify_negative(election: Election, ballot, count: int, config: EngineConfig | None = None,
                    before: TabulationRecord | None = None) -> ParadoxReport | None:
    report = _verify(election, ballot, count, config or EngineConfig(), before)
    if report and report.kind in (ParadoxKind.NEGATIVE, ParadoxKind.BOTH):
        return report
    return None


def verify_positive(election: Election, ballot, count: int, config: EngineConfig | None = None,
                    before: TabulationRecord | None = None, check_theorem: bool = False) -> ParadoxReport | None:
    """Positive involvement cannot happen with one seat, so that case returns
    None without counting unless ``check_theorem`` asks for the count anyway."""
    ballot = ballot if isinstance(ballot, Ballot) else Ballot(ballot)
    if election.seats == 1 and not check_theorem:
        _check_full(election, ballot)
        return None
    report = _verify(election, ballot, count, config or EngineConfig(), before)
    if report and report.kind in (ParadoxKind.POSITIVE, ParadoxKind.BOTH):
        if election.seats == 1:
            raise AssertionError(f"single-seat positive involvement at count {count}: engine defect")
        return report
    return None


def verify(election: Election, ballot, count: int, kind: ParadoxKind,
           config: EngineConfig | None = None, before: TabulationRecord | None = None) -> ParadoxReport | None:
    kind = ParadoxKind(kind)
    if kind is ParadoxKind.NEGATIVE:
        return verify_negative(election, ballot, count, config, before)
    if kind is ParadoxKind.POSITIVE:
        return verify_positive(election, ballot, count, config, before)
    report = _verify(election, ballot, count, config or EngineConfig(), before)
    return report if report and report.kind is ParadoxKind.BOTH else None


def _runs(counts: Iterable[int]) -> tuple[tuple[int, int], ...]:
    runs: list[list[int]] = []
    for c in counts:
        if runs and runs[-1][1] == c - 1:
            runs[-1][1] = c
        else:
            runs.append([c, c])
    return tuple((lo, hi) for lo, hi in runs)


def scan_counts(election: Election, ballot, kind: ParadoxKind, counts: Iterable[int],
                config: EngineConfig | None = None) -> list[int]:
    """Every count in ``counts`` at which the paradox verifies."""
    config = config or EngineConfig()
    ballot = ballot if isinstance(ballot, Ballot) else Ballot(ballot)
    before = tabulate(election, config)
    return [c for c in counts if verify(election, ballot, c, kind, config, before)]


def count_intervals(election: Election, ballot, kind: ParadoxKind, scan_cap: int | None = None,
                    config: EngineConfig | None = None, start: int = 1) -> CountIntervalSet:
    """Maximal runs of counts in ``[start, scan_cap]`` for which the paradox holds.

    The scan is linear because the set of working counts need not be
    contiguous. ``scan_cap`` defaults to the election's electorate size.
    """
    if scan_cap is None:
        scan_cap = election.profile.total_voters
    if scan_cap <= 0:
        raise ValueError("scan_cap must be positive")
    hits = scan_counts(election, ballot, kind, range(start, scan_cap + 1), config)
    return CountIntervalSet(_runs(hits), scan_cap)


def sweep_cap(bullets: int, cap_factor: Fraction | float | int = 2, cap_floor: int = 0) -> int:
    if bullets > 0:
        return math.ceil(Fraction(cap_factor) * bullets)
    return max(math.ceil(Fraction(cap_factor)), cap_floor)


def bullet_sweep(election: Election, cap_factor=2, config: EngineConfig | None = None,
                 cap_floor: int = 0, candidates: Sequence[int] | None = None) -> list[SweepHit]:
    """Add 1, 2, ... bullet votes for each candidate and log every count that
    changes the winner set.

    A clean sweep does not show the election is paradox-free; it only means
    this search found nothing.
    """
    config = config or EngineConfig()
    before = tabulate(election, config).winners
    bullets = bullet_counts(election.profile)
    hits = []
    for cand in candidates if candidates is not None else range(election.n):
        ballot = Ballot([cand])
        for k in range(1, sweep_cap(bullets[cand], cap_factor, cap_floor) + 1):
            after = tabulate(_perturbed(election, ballot, k), config).winners
            if after != before:
                hits.append(SweepHit(cand, k, before, after))
    return hits


def _elimination_order(record: TabulationRecord) -> list[int]:
    return [e.candidate for e in record.events if e.kind is EventKind.ELIMINATED]


def complete_to_ranking(election: Election, top: int, last: int, strategy: str = "heuristic",
                        config: EngineConfig | None = None, scan_cap: int | None = None,
                        exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT) -> list[Ballot]:
    """Candidate full rankings with ``top`` first and ``last`` last, most paradoxical first.

    The heuristic keeps the original winners directly under ``top``, trying
    each winner in the second slot, with everyone else in roster order and
    then in elimination order. The exhaustive strategy tries every middle
    permutation and keeps those that verify for some count up to ``scan_cap``.
    """
    if top == last:
        raise ValueError("top and last must differ")
    config = config or EngineConfig()
    record = tabulate(election, config)
    middle = [c for c in range(election.n) if c not in (top, last)]

    if strategy == "exhaustive":
        if election.n > exhaustive_limit:
            raise ValueError(f"{election.n} candidates exceeds the exhaustive limit of {exhaustive_limit}")
        cap = scan_cap or election.profile.total_voters
        found = []
        for perm in itertools.permutations(middle):
            ballot = Ballot([top, *perm, last])
            if any(_verify(election, ballot, c, config, record) for c in range(1, cap + 1)):
                found.append(ballot)
        return found
    if strategy != "heuristic":
        raise ValueError(f"unknown strategy {strategy!r}")

    winners = [c for c in middle if c in record.winners]
    losers = [c for c in middle if c not in record.winners]
    elim = _elimination_order(record)
    by_elim = sorted(losers, key=lambda c: elim.index(c) if c in elim else len(elim))
    loser_orders = [losers, by_elim, by_elim[::-1]]
    seconds = winners or [None]
    out: list[Ballot] = []
    for second in seconds:
        ws = winners if second is None else [second] + [w for w in winners if w != second]
        for lo in loser_orders:
            b = Ballot([top, *ws, *lo, last])
            if b not in out:
                out.append(b)
    return out


def margin_curve(election: Election, ballot, counts: Iterable[int], a: int, b: int,
                 config: EngineConfig | None = None) -> list[tuple[int, Fraction]]:
    """Penultimate-round margin of ``a`` over ``b`` for each count of added ballots."""
    for c in (a, b):
        if not 0 <= c < election.n:
            raise ValueError(f"candidate id {c} out of range")
    config = config or EngineConfig()
    ballot = ballot if isinstance(ballot, Ballot) else Ballot(ballot)
    return [
        (k, penultimate_margin(tabulate(_perturbed(election, ballot, k), config), a, b))
        for k in counts
    ]


@dataclass(frozen=True)
class SweepFinding:
    hit: SweepHit
    report: ParadoxReport
    intervals: CountIntervalSet


def certify_sweep_hits(election: Election, hits: Sequence[SweepHit], config: EngineConfig | None = None,
                       scan_cap: int | None = None) -> Iterator[SweepFinding]:
    """Try to turn each sweep hit into a certified paradox with a full ranking.

    For each newly winning candidate in a hit, heuristic completions with the
    bullet target on top and that candidate last are checked at the hit's
    count; the first that verifies is scanned for its full count range.
    """
    config = config or EngineConfig()
    before = tabulate(election, config)
    seen = set()
    for hit in hits:
        for newcomer in sorted(hit.after - hit.before):
            if (hit.candidate, newcomer) in seen or newcomer == hit.candidate:
                continue
            for ballot in complete_to_ranking(election, hit.candidate, newcomer, config=config):
                report = _verify(election, ballot, hit.count, config, before)
                if report is None:
                    continue
                seen.add((hit.candidate, newcomer))
                report = ParadoxReport(report.kind, report.added_ballot, report.count, report.promoted,
                                       report.displaced, report.before, report.after, method="sweep")
                intervals = count_intervals(election, ballot, report.kind, scan_cap, config)
                yield SweepFinding(hit, report, intervals)
                break
