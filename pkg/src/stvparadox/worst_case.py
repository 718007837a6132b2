"""Worst-case involvement constructions and a randomized check of the
winner-overlap bound.

Adding identical ballots whose top S slots hold the current winners can
never unseat all of them. The constructions here come within one seat of
that: S-1 of the winners ranked on top are replaced by the S-1 candidates
ranked at the bottom.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .engine import EngineConfig, TabulationRecord, tabulate
from .model import Ballot, Candidate, Election, Profile, add_ballots

DEFAULT_MAX_SEATS = 6


class ConstructionError(AssertionError):
    """A construction failed one of its clauses; carries the offending traces."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


@dataclass(frozen=True)
class ConstructionCertificate:
    seats: int
    profile: Profile
    added_ballot: Ballot
    added_count: int
    clause1_ok: bool
    clause2_ok: bool
    clause3_ok: bool
    before: TabulationRecord
    after: TabulationRecord

    @property
    def ok(self) -> bool:
        return self.clause1_ok and self.clause2_ok and self.clause3_ok


def _roster(n: int) -> tuple[Candidate, ...]:
    return tuple(Candidate(i, f"C{i + 1}") for i in range(n))


def _fill(prefix: list[int], n: int) -> Ballot:
    return Ballot(prefix + [c for c in range(n) if c not in prefix])


def _split(total: int, parts: int) -> list[int]:
    # floors first, the extra ballots on the last types
    base, extra = divmod(total, parts)
    return [base + (1 if i >= parts - extra else 0) for i in range(parts)]


def construct_s2() -> tuple[Profile, Ballot, int]:
    """The bespoke four-candidate profile for two seats, its added ballot and count."""
    rows = [
        (334, [0, 2, 3, 1]),
        (314, [1, 0, 2, 3]),
        (312, [2, 1, 0, 3]),
        (40, [3, 0, 1, 2]),
    ]
    profile = Profile(_roster(4), {Ballot(r): c for c, r in rows})
    return profile, Ballot([1, 0, 3, 2]), 3


def first_choice_sizes(seats: int) -> list[int]:
    """Number of ballots topped by each of C1..C(2S-1)."""
    S = seats
    total = (S + 1) * 10**S
    v1 = 10**S + 3
    v2 = ((S + 1) * 10**S - 10**S - 3) // (2 * S - 2) - 2
    sizes = [v1, v2] + [0] * (2 * S - 3)
    sizes[S] = v2 + 1  # C(S+1)
    others = [j for j in range(2, 2 * S - 1) if j != S]
    for j in others:
        sizes[j] = v2 + 2
    short = total - sum(sizes)
    for j in others:
        bump = min(2, short)
        sizes[j] += bump
        short -= bump
    if short != 0:
        raise ConstructionError(f"cannot reach {(S + 1) * 10**S} voters with V_j in [V2+2, V2+4] for S={S}")
    return sizes


def construct_general(seats: int, max_seats: int = DEFAULT_MAX_SEATS) -> tuple[Profile, Ballot, int]:
    S = seats
    if S < 3:
        raise ValueError("construct_general needs S >= 3; use construct_s2 for S = 2")
    if S > max_seats:
        raise ValueError(f"S={S} exceeds the configured ceiling {max_seats}")
    n = 2 * S - 1
    sizes = first_choice_sizes(S)
    low_side = list(range(1, S))       # C2..CS
    high_side = list(range(S, n))      # C(S+1)..C(2S-1)
    ballots: dict[Ballot, int] = {_fill([0, 1], n): sizes[0]}
    for j in range(1, n):
        seconds = high_side if j < S else low_side
        for second, count in zip(seconds, _split(sizes[j], S - 1)):
            if count:
                ballots[_fill([j, second], n)] = count
    profile = Profile(_roster(n), ballots)
    added = Ballot(list(range(2, S)) + [1, 0] + high_side)
    return profile, added, 2 * (S + 1)


def construct_table6() -> Profile:
    return construct_general(3)[0]


def build_construction(seats: int, max_seats: int = DEFAULT_MAX_SEATS) -> tuple[Profile, Ballot, int]:
    if seats == 2:
        return construct_s2()
    return construct_general(seats, max_seats)


def verify_construction(
    seats: int,
    config: EngineConfig | None = None,
    max_seats: int = DEFAULT_MAX_SEATS,
) -> ConstructionCertificate:
    """Run the engine before and after the prescribed addition and check all three clauses."""
    if seats < 2:
        raise ValueError("constructions exist only for S >= 2")
    config = config or EngineConfig()
    profile, ballot, count = build_construction(seats, max_seats)
    before = tabulate(Election(profile, seats), config)
    after = tabulate(Election(add_ballots(profile, ballot, count), seats), config)
    w, w2 = before.winners, after.winners
    top = set(ballot.ranking[:seats])
    bottom = set(ballot.ranking[-(seats - 1):])
    clause1 = top == set(w)
    clause2 = len(w & w2) == 1 and not (set(ballot.ranking[:seats - 1]) & w2)
    clause3 = bottom <= w2
    cert = ConstructionCertificate(seats, profile, ballot, count, clause1, clause2, clause3, before, after)
    if not cert.ok:
        raise ConstructionError(
            f"construction for S={seats} failed: clause1={clause1} clause2={clause2} clause3={clause3}; "
            f"winners before {sorted(w)} after {sorted(w2)}",
            cert,
        )
    return cert


@dataclass(frozen=True)
class Prop1Counterexample:
    trial: int
    election: Election
    ballot: Ballot
    count: int
    before: frozenset[int]
    after: frozenset[int]


@dataclass
class FuzzResult:
    trials: int
    skipped_trivial: int = 0
    counterexample: Prop1Counterexample | None = None
    checked: list[int] = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return self.counterexample is None


def random_profile(rng: random.Random, n: int, voters: int, max_types: int = 40) -> Profile:
    """Random profile with up to ``max_types`` distinct, possibly partial, rankings."""
    types = []
    for _ in range(rng.randint(1, max_types)):
        perm = rng.sample(range(n), n)
        types.append(tuple(perm[:rng.randint(1, n)]))
    ballots: dict[Ballot, int] = {}
    for _ in range(voters):
        b = Ballot(rng.choice(types))
        ballots[b] = ballots.get(b, 0) + 1
    return Profile(_roster(n), ballots)


def prop1_fuzz(
    trials: int,
    seed: int,
    max_candidates: int = 8,
    max_seats: int = 3,
    max_voters: int = 500,
    config: EngineConfig | None = None,
) -> FuzzResult:
    """Randomized search for an addition of winner-topped ballots that unseats every winner.

    Each trial draws its own RNG from ``(seed, trial)`` so any trial can be
    replayed alone. Stops at the first counterexample.
    """
    config = config or EngineConfig()
    result = FuzzResult(trials)
    for trial in range(trials):
        rng = random.Random(f"{seed}:{trial}")
        seats = rng.randint(1, max_seats)
        n = rng.randint(max(seats, 2), max_candidates)
        voters = rng.randint(max(n, 10), max_voters)
        election = Election(random_profile(rng, n, voters), seats)
        before = tabulate(election, config).winners
        top = rng.sample(sorted(before), seats)
        rest = [c for c in range(n) if c not in before]
        rng.shuffle(rest)
        ballot = Ballot(top + rest[:rng.randint(0, len(rest))])
        count = rng.randint(1, voters)
        if n < 2 * seats:
            result.skipped_trivial += 1
        after = tabulate(election.with_profile(add_ballots(election.profile, ballot, count)), config).winners
        if not before & after:
            result.counterexample = Prop1Counterexample(trial, election, ballot, count, before, after)
            return result
    return result
