"""Scottish-rules STV with Weighted Inclusive Gregory surplus transfers.

Each round is one column of a votes-by-round table. At the start of a round
every standing candidate at or above quota is elected; then exactly one
action happens: the largest pending surplus is transferred, or, if none is
pending, the lowest standing candidate is eliminated. The count stops when
all seats are filled or when the standing candidates just fill the rest.

Ballots travel in parcels that share a value, so the cost of a transfer is
one multiplication per parcel rather than one per ballot paper.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass
from fractions import Fraction

from .model import Election, truncate5


class Arithmetic(str, enum.Enum):
    EXACT = "exact"
    FIXED5 = "fixed5"


@dataclass(frozen=True)
class EngineConfig:
    arithmetic: Arithmetic = Arithmetic.EXACT
    tie_seed: int = 0
    quota_override: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "arithmetic", Arithmetic(self.arithmetic))
        if self.quota_override is not None and self.quota_override <= 0:
            raise ValueError("quota_override must be positive")


class EventKind(str, enum.Enum):
    ELECTED = "Elected"
    ELECTED_WITHOUT_QUOTA = "ElectedWithoutQuota"
    ELIMINATED = "Eliminated"
    SURPLUS_TRANSFERRED = "SurplusTransferred"
    EXHAUSTED = "ExhaustedToNontransferable"


@dataclass(frozen=True)
class RoundEvent:
    kind: EventKind
    candidate: int
    round: int
    transfer_value: Fraction | None = None
    amounts: tuple[tuple[int, Fraction], ...] = ()
    value: Fraction | None = None


@dataclass(frozen=True)
class TieDraw:
    round: int
    purpose: str  # "eliminate" or "surplus"
    tied: tuple[int, ...]
    chosen: int
    by_lot: bool


@dataclass(frozen=True)
class TabulationRecord:
    candidates: tuple[str, ...]
    seats: int
    total_voters: int
    quota: int
    rounds: tuple[dict[int, Fraction], ...]
    held_by_elected: tuple[Fraction, ...]
    nontransferable_by_round: tuple[Fraction, ...]
    events: tuple[RoundEvent, ...]
    winners: frozenset[int]
    ranking: tuple[int, ...]
    tie_draws: tuple[TieDraw, ...] = ()
    arithmetic: Arithmetic = Arithmetic.EXACT
    tie_seed: int = 0

    @property
    def nontransferable(self) -> Fraction:
        return self.nontransferable_by_round[-1]

    def events_of(self, *kinds: EventKind) -> list[RoundEvent]:
        return [e for e in self.events if e.kind in kinds]

    def elected_round(self, cand: int) -> int | None:
        for e in self.events:
            if e.candidate == cand and e.kind in (EventKind.ELECTED, EventKind.ELECTED_WITHOUT_QUOTA):
                return e.round
        return None

    def eliminated_round(self, cand: int) -> int | None:
        for e in self.events:
            if e.candidate == cand and e.kind is EventKind.ELIMINATED:
                return e.round
        return None

    def winner_names(self) -> list[str]:
        return sorted(self.candidates[c] for c in self.winners)


def quota(total_voters: int, seats: int) -> int:
    if total_voters <= 0 or seats <= 0:
        raise ValueError("total_voters and seats must be positive")
    return total_voters // (seats + 1) + 1


def draw_lot(seed: int, round_no: int, tied) -> int:
    """Deterministic lot among ``tied`` candidate ids, keyed by seed and round."""
    tied = sorted(tied)
    key = f"{seed}:{round_no}:{','.join(map(str, tied))}".encode()
    digest = int.from_bytes(hashlib.sha256(key).digest()[:8], "big")
    return tied[digest % len(tied)]


def _break_tie(tied, history, lowest: bool, seed: int, round_no: int, purpose: str):
    """Earliest-stage rule, then lot. Returns the chosen id and the draw record."""
    pool = sorted(tied)
    for totals in history:
        if any(c not in totals for c in pool):
            continue
        vals = {c: totals[c] for c in pool}
        if len(set(vals.values())) > 1:
            target = min(vals.values()) if lowest else max(vals.values())
            pool = [c for c in pool if vals[c] == target]
            if len(pool) == 1:
                return pool[0], TieDraw(round_no, purpose, tuple(sorted(tied)), pool[0], False)
    chosen = draw_lot(seed, round_no, pool)
    return chosen, TieDraw(round_no, purpose, tuple(sorted(tied)), chosen, True)


class _Count:
    def __init__(self, election: Election, config: EngineConfig):
        self.election = election
        self.config = config
        self.fixed5 = config.arithmetic is Arithmetic.FIXED5
        profile = election.profile
        self.n = profile.n
        self.seats = election.seats
        self.quota = config.quota_override or quota(profile.total_voters, election.seats)
        self.standing = set(range(self.n))
        # holdings[c] maps ballot value -> {ranking: count}
        self.holdings: dict[int, dict[Fraction, dict[tuple, int]]] = {c: {} for c in range(self.n)}
        self.totals = {c: Fraction(0) for c in range(self.n)}
        one = Fraction(1)
        for ballot, count in profile.ballots.items():
            parcel = self.holdings[ballot.top].setdefault(one, {})
            parcel[ballot.ranking] = parcel.get(ballot.ranking, 0) + count
            self.totals[ballot.top] += count
        self.nontransferable = Fraction(0)
        self.elected: list[int] = []
        self.without_quota: list[int] = []
        self.pending: list[int] = []
        self.eliminated: list[int] = []
        self.events: list[RoundEvent] = []
        self.rounds: list[dict[int, Fraction]] = []
        self.held: list[Fraction] = []
        self.nt_by_round: list[Fraction] = []
        self.draws: list[TieDraw] = []

    def _order_desc(self, cands, round_no, purpose):
        """Order candidates by descending current total, resolving ties."""
        remaining = sorted(cands)
        ordered = []
        while remaining:
            best = max(self.totals[c] for c in remaining)
            tied = [c for c in remaining if self.totals[c] == best]
            if len(tied) == 1:
                pick = tied[0]
            else:
                pick, draw = _break_tie(tied, self.rounds[:-1], False, self.config.tie_seed, round_no, purpose)
                self.draws.append(draw)
            ordered.append(pick)
            remaining.remove(pick)
        return ordered

    def _move(self, source: int, scale, round_no: int):
        """Send every parcel held by ``source`` onward; ``scale`` maps old value to new."""
        received: dict[int, Fraction] = {}
        exhausted = Fraction(0)
        moved = Fraction(0)
        for value, parcel in self.holdings[source].items():
            new_value = scale(value)
            for ranking, count in parcel.items():
                dest = next((c for c in ranking if c in self.standing), None)
                amount = new_value * count
                moved += amount
                if dest is None:
                    exhausted += amount
                    continue
                bucket = self.holdings[dest].setdefault(new_value, {})
                bucket[ranking] = bucket.get(ranking, 0) + count
                received[dest] = received.get(dest, Fraction(0)) + amount
        self.holdings[source] = {}
        for dest, amount in received.items():
            self.totals[dest] += amount
        self.nontransferable += exhausted
        return received, exhausted, moved

    def _transfer_surplus(self, cand: int, round_no: int):
        total = self.totals[cand]
        surplus = total - self.quota
        assert surplus >= 0, "negative surplus"
        ratio = surplus / total
        if self.fixed5:
            scale = lambda v: truncate5(v * ratio)  # noqa: E731
        else:
            scale = lambda v: v * ratio  # noqa: E731
        received, exhausted, moved = self._move(cand, scale, round_no)
        # truncation residue is lost to the count, booked as non-transferable
        self.nontransferable += surplus - moved
        self.totals[cand] = Fraction(self.quota)
        self.events.append(RoundEvent(
            EventKind.SURPLUS_TRANSFERRED, cand, round_no, ratio,
            tuple(sorted(received.items())), surplus,
        ))
        if exhausted:
            self.events.append(RoundEvent(EventKind.EXHAUSTED, cand, round_no, value=exhausted))

    def _eliminate(self, cand: int, round_no: int):
        self.standing.discard(cand)
        self.eliminated.append(cand)
        value = self.totals[cand]
        received, exhausted, _ = self._move(cand, lambda v: v, round_no)
        self.totals[cand] = Fraction(0)
        self.events.append(RoundEvent(
            EventKind.ELIMINATED, cand, round_no, Fraction(1), tuple(sorted(received.items())), value,
        ))
        if exhausted:
            self.events.append(RoundEvent(EventKind.EXHAUSTED, cand, round_no, value=exhausted))

    def _snapshot(self):
        self.rounds.append({c: self.totals[c] for c in sorted(self.standing)})
        self.held.append(sum((self.totals[c] for c in self.elected), Fraction(0)))
        self.nt_by_round.append(self.nontransferable)

    def run(self) -> TabulationRecord:
        round_no = 0
        while True:
            round_no += 1
            self._snapshot()
            reached = [c for c in self.standing if self.totals[c] >= self.quota]
            if reached:
                for c in self._order_desc(reached, round_no, "surplus"):
                    if len(self.elected) == self.seats:
                        break
                    self.standing.discard(c)
                    self.elected.append(c)
                    self.pending.append(c)
                    self.events.append(RoundEvent(EventKind.ELECTED, c, round_no, value=self.totals[c]))
            if len(self.elected) == self.seats:
                break
            if len(self.elected) + len(self.standing) <= self.seats:
                for c in self._order_desc(self.standing, round_no, "surplus"):
                    self.standing.discard(c)
                    self.elected.append(c)
                    self.without_quota.append(c)
                    self.events.append(RoundEvent(
                        EventKind.ELECTED_WITHOUT_QUOTA, c, round_no, value=self.totals[c]))
                break
            if self.pending:
                best = max(self.totals[c] for c in self.pending)
                tied = [c for c in self.pending if self.totals[c] == best]
                if len(tied) == 1:
                    cand = tied[0]
                else:
                    cand, draw = _break_tie(tied, self.rounds[:-1], False, self.config.tie_seed,
                                            round_no, "surplus")
                    self.draws.append(draw)
                self.pending.remove(cand)
                self._transfer_surplus(cand, round_no)
            else:
                low = min(self.totals[c] for c in self.standing)
                tied = [c for c in self.standing if self.totals[c] == low]
                if len(tied) == 1:
                    cand = tied[0]
                else:
                    cand, draw = _break_tie(tied, self.rounds[:-1], True, self.config.tie_seed,
                                            round_no, "eliminate")
                    self.draws.append(draw)
                self._eliminate(cand, round_no)

        record = TabulationRecord(
            candidates=tuple(self.election.profile.names()),
            seats=self.seats,
            total_voters=self.election.profile.total_voters,
            quota=self.quota,
            rounds=tuple(self.rounds),
            held_by_elected=tuple(self.held),
            nontransferable_by_round=tuple(self.nt_by_round),
            events=tuple(self.events),
            winners=frozenset(self.elected),
            ranking=(),
            tie_draws=tuple(self.draws),
            arithmetic=self.config.arithmetic,
            tie_seed=self.config.tie_seed,
        )
        return _with_ranking(record)


def _with_ranking(record: TabulationRecord) -> TabulationRecord:
    from dataclasses import replace
    return replace(record, ranking=tuple(stv_ranking(record)))


def tabulate(election: Election, config: EngineConfig | None = None) -> TabulationRecord:
    return _Count(election, config or EngineConfig()).run()


def winners(election: Election, config: EngineConfig | None = None) -> frozenset[int]:
    return tabulate(election, config).winners


def stv_ranking(record: TabulationRecord) -> list[int]:
    """Total order: quota winners by round then total, winners without quota
    by final total, continuing losers by final total, then eliminated
    candidates latest-first."""
    quota_winners = [e.candidate for e in record.events if e.kind is EventKind.ELECTED]
    no_quota = [e for e in record.events if e.kind is EventKind.ELECTED_WITHOUT_QUOTA]
    no_quota = [e.candidate for e in sorted(no_quota, key=lambda e: -e.value)]
    eliminated = [e.candidate for e in record.events if e.kind is EventKind.ELIMINATED]
    placed = set(quota_winners) | set(no_quota) | set(eliminated)
    last = record.rounds[-1]
    continuing = sorted((c for c in last if c not in placed), key=lambda c: (-last[c], c))
    return quota_winners + no_quota + continuing + eliminated[::-1]


def penultimate_margin(record: TabulationRecord, a: int, b: int) -> Fraction:
    """``a``'s total minus ``b``'s in the round where one of them is knocked out.

    That is the elimination round of whichever is eliminated while both
    stand; failing that, the last round in which both are standing.
    """
    if a == b:
        return Fraction(0)
    both = [k for k, totals in enumerate(record.rounds, start=1) if a in totals and b in totals]
    if not both:
        raise ValueError(f"candidates {a} and {b} are never standing in the same round")
    for k in both:
        for e in record.events:
            if e.round == k and e.kind is EventKind.ELIMINATED and e.candidate in (a, b):
                totals = record.rounds[k - 1]
                return totals[a] - totals[b]
    totals = record.rounds[both[-1] - 1]
    return totals[a] - totals[b]
