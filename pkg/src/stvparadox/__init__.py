"""Scottish STV tabulation and involvement-paradox auditing."""

from .audit import (
    CountIntervalSet,
    ParadoxKind,
    ParadoxReport,
    SweepHit,
    bullet_sweep,
    complete_to_ranking,
    count_intervals,
    margin_curve,
    verify_negative,
    verify_positive,
)
from .ballot_io import parse_blt, read_blt, render_round_table, write_blt, write_report_json
from .engine import (
    Arithmetic,
    EngineConfig,
    EventKind,
    TabulationRecord,
    penultimate_margin,
    quota,
    stv_ranking,
    tabulate,
)
from .model import Ballot, Candidate, Election, Profile, add_ballots, first_place_totals, truncate5
from .worst_case import (
    construct_general,
    construct_s2,
    construct_table6,
    prop1_fuzz,
    verify_construction,
)

__all__ = [
    "add_ballots",
    "Arithmetic",
    "Ballot",
    "bullet_sweep",
    "Candidate",
    "complete_to_ranking",
    "construct_general",
    "construct_s2",
    "construct_table6",
    "count_intervals",
    "CountIntervalSet",
    "Election",
    "EngineConfig",
    "EventKind",
    "first_place_totals",
    "margin_curve",
    "ParadoxKind",
    "ParadoxReport",
    "parse_blt",
    "penultimate_margin",
    "Profile",
    "prop1_fuzz",
    "quota",
    "read_blt",
    "render_round_table",
    "stv_ranking",
    "SweepHit",
    "tabulate",
    "TabulationRecord",
    "truncate5",
    "verify_construction",
    "verify_negative",
    "verify_positive",
    "write_blt",
    "write_report_json",
]

__version__ = "0.1.0"
