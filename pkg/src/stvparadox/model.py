"""Candidates, ballots, preference profiles and vote-value arithmetic.

Vote values are :class:`fractions.Fraction` throughout. The ``fixed5`` mode
of the engine keeps every per-ballot value on the 10^-5 grid via
:func:`truncate5`, so both modes stay exact and no binary float ever enters
a count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

FIXED5_DENOMINATOR = 100_000


@dataclass(frozen=True)
class Candidate:
    id: int
    name: str
    party: str | None = None

    def __post_init__(self):
        if not self.name:
            raise ValueError(f"candidate {self.id} has an empty name")


@dataclass(frozen=True, order=True)
class Ballot:
    """A strict ranking of distinct candidate ids, possibly partial."""

    ranking: tuple[int, ...]

    def __init__(self, ranking: Iterable[int]):
        ranking = tuple(int(c) for c in ranking)
        if not ranking:
            raise ValueError("a ballot must rank at least one candidate")
        if len(set(ranking)) != len(ranking):
            raise ValueError(f"ballot ranks a candidate twice: {ranking}")
        if min(ranking) < 0:
            raise ValueError(f"negative candidate id in ballot: {ranking}")
        object.__setattr__(self, "ranking", ranking)

    def __len__(self) -> int:
        return len(self.ranking)

    def __iter__(self):
        return iter(self.ranking)

    @property
    def top(self) -> int:
        return self.ranking[0]

    @property
    def last(self) -> int:
        return self.ranking[-1]


@dataclass(frozen=True, eq=False)
class Profile:
    """An immutable multiset of ballots over a roster.

    ``declared_total`` lets a profile carry more voters than its listed
    ballots, which is how published profiles that already dropped some
    exhausted ballots still produce the right quota.
    """

    roster: tuple[Candidate, ...]
    ballots: Mapping[Ballot, int]
    declared_total: int | None = None
    _ballot_sum: int = field(init=False, repr=False)

    def __post_init__(self):
        roster = tuple(self.roster)
        for i, cand in enumerate(roster):
            if cand.id != i:
                raise ValueError(f"roster ids must be dense from 0; got {cand.id} at position {i}")
        n = len(roster)
        merged: dict[Ballot, int] = {}
        for ballot, count in self.ballots.items():
            if not isinstance(ballot, Ballot):
                ballot = Ballot(ballot)
            if count <= 0:
                raise ValueError(f"ballot count must be positive, got {count} for {ballot.ranking}")
            if max(ballot.ranking) >= n:
                raise ValueError(f"ballot {ballot.ranking} names a candidate outside the roster of {n}")
            merged[ballot] = merged.get(ballot, 0) + int(count)
        total = sum(merged.values())
        if self.declared_total is not None and self.declared_total < total:
            raise ValueError(f"declared total {self.declared_total} is below the ballot sum {total}")
        object.__setattr__(self, "roster", roster)
        object.__setattr__(self, "ballots", dict(sorted(merged.items())))
        object.__setattr__(self, "_ballot_sum", total)

    @classmethod
    def from_rankings(
        cls,
        names: Sequence[str],
        rows: Iterable[tuple[int, Sequence[str | int]]],
        declared_total: int | None = None,
    ) -> "Profile":
        """Build a profile from ``(count, ranking)`` rows naming candidates by name or id."""
        roster = tuple(Candidate(i, name) for i, name in enumerate(names))
        index = {c.name: c.id for c in roster}
        ballots: dict[Ballot, int] = {}
        for count, ranking in rows:
            ids = [index[c] if isinstance(c, str) else c for c in ranking]
            b = Ballot(ids)
            ballots[b] = ballots.get(b, 0) + count
        return cls(roster, ballots, declared_total)

    @property
    def n(self) -> int:
        return len(self.roster)

    @property
    def ballot_count(self) -> int:
        return self._ballot_sum

    @property
    def total_voters(self) -> int:
        if self.declared_total is not None:
            return self.declared_total
        return self._ballot_sum

    def names(self) -> list[str]:
        return [c.name for c in self.roster]

    def candidate_id(self, name: str) -> int:
        for c in self.roster:
            if c.name == name:
                return c.id
        raise KeyError(name)

    def __eq__(self, other):
        if not isinstance(other, Profile):
            return NotImplemented
        return (
            self.roster == other.roster
            and self.ballots == other.ballots
            and self.total_voters == other.total_voters
        )

    def __hash__(self):
        return hash((self.roster, tuple(self.ballots.items()), self.total_voters))


@dataclass(frozen=True)
class Election:
    profile: Profile
    seats: int
    title: str = ""

    def __post_init__(self):
        if not 1 <= self.seats <= self.profile.n:
            raise ValueError(f"seats must be in 1..{self.profile.n}, got {self.seats}")

    @property
    def n(self) -> int:
        return self.profile.n

    def with_profile(self, profile: Profile) -> "Election":
        return Election(profile, self.seats, self.title)


def add_ballots(profile: Profile, ballot: Ballot | Sequence[int], count: int) -> Profile:
    """Return a new profile with ``count`` extra copies of ``ballot``."""
    if count <= 0:
        raise ValueError(f"count must be positive, got {count}")
    if not isinstance(ballot, Ballot):
        ballot = Ballot(ballot)
    if max(ballot.ranking) >= profile.n:
        raise ValueError(f"ballot {ballot.ranking} names a candidate outside the roster")
    ballots = dict(profile.ballots)
    ballots[ballot] = ballots.get(ballot, 0) + count
    declared = None if profile.declared_total is None else profile.declared_total + count
    return Profile(profile.roster, ballots, declared)


def first_place_totals(profile: Profile) -> dict[int, Fraction]:
    totals = {c.id: Fraction(0) for c in profile.roster}
    for ballot, count in profile.ballots.items():
        totals[ballot.top] += count
    return totals


def bullet_counts(profile: Profile) -> dict[int, int]:
    counts = {c.id: 0 for c in profile.roster}
    for ballot, count in profile.ballots.items():
        if len(ballot) == 1:
            counts[ballot.top] += count
    return counts


def normalize_full_rankings(profile: Profile) -> Profile:
    """Collapse every complete ranking to its (n-1)-prefix.

    Both forms carry the same information, so merging them gives the
    compact presentation used by published profile tables.
    """
    n = profile.n
    ballots: dict[Ballot, int] = {}
    for ballot, count in profile.ballots.items():
        if n > 1 and len(ballot) == n:
            ballot = Ballot(ballot.ranking[:-1])
        ballots[ballot] = ballots.get(ballot, 0) + count
    return Profile(profile.roster, ballots, profile.declared_total)


def truncate5(v: Fraction | int) -> Fraction:
    """Largest multiple of 10^-5 not exceeding ``v``."""
    v = Fraction(v)
    if v < 0:
        raise ValueError(f"cannot truncate a negative vote value: {v}")
    return Fraction(v.numerator * FIXED5_DENOMINATOR // v.denominator, FIXED5_DENOMINATOR)
