"""Acceptance suite: one test per criterion, summarized as [PASS]/[FAIL]/[SKIP]
lines at the end of the pytest run."""

import filecmp
import json
import os
import re
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

import acceptance_artifacts as art
from stvparadox.audit import ParadoxKind, bullet_sweep, certify_sweep_hits, count_intervals, margin_curve
from stvparadox.ballot_io import import_scot, parse_ranking, read_blt, round_half_up
from stvparadox.engine import EngineConfig, EventKind, penultimate_margin, tabulate
from stvparadox.model import add_ballots
from stvparadox.worst_case import construct_table6

HERE = Path(__file__).parent


def named(record, k):
    return {record.candidates[c]: v for c, v in record.rounds[k].items()}


@pytest.mark.criterion("1 quota values")
def test_criterion_1_quota():
    _, got = art.quotas()
    assert got == art.QUOTA_CASES


@pytest.mark.criterion("2 golden round tables (one seat, two seats, three-seat worst case)")
def test_criterion_2_golden_tables():
    _, rec = art.golden_tables()

    t1 = rec["table1"]
    assert t1.quota == 1007
    assert [named(t1, k) for k in range(3)] == [
        {"Findlay": 701, "Gillies": 539, "McCabe": 564},
        {"Findlay": 767, "McCabe": 772},
        {"McCabe": 1168},
    ]
    assert t1.winner_names() == ["McCabe"]

    p2 = rec["p2"]
    printed = [
        {"A": "3350", "B": "2250", "C": "2220", "D": "2180"},
        {"B": "2250.48", "C": "2235.52", "D": "2180"},
        {"B": "3339.48", "C": "3326.52"},
    ]
    for k, row in enumerate(printed):
        for name, value in row.items():
            shown = round_half_up(named(p2, k)[name], 2)
            assert abs(Fraction(str(shown)) - Fraction(value)) <= Fraction(5, 1000), (k, name)
    transfer = dict(p2.events_of(EventKind.SURPLUS_TRANSFERRED)[0].amounts)
    assert str(round_half_up(transfer[1], 2)) == "0.48"
    assert str(round_half_up(transfer[2], 2)) == "15.52"
    assert p2.winner_names() == ["A", "B"]

    before, after = rec["table6"], rec["table6_plus8"]
    assert [named(before, k) for k in range(3)] == [
        {"C1": 1003, "C2": 747, "C3": 751, "C4": 748, "C5": 751},
        {"C2": 749, "C3": 751, "C4": 748, "C5": 751},
        {"C2": 1123, "C3": 1125, "C5": 751},
    ]
    assert before.winner_names() == ["C1", "C2", "C3"]
    assert after.quota == 1003
    assert [named(after, k) for k in range(3)] == [
        {"C1": 1003, "C2": 747, "C3": 759, "C4": 748, "C5": 751},
        {"C2": 747, "C3": 759, "C4": 748, "C5": 751},
        {"C3": 759, "C4": 1121, "C5": 1125},
    ]
    assert after.winner_names() == ["C1", "C4", "C5"]


@pytest.mark.criterion("3 paradox count ranges [22,3062] and [26,38]")
def test_criterion_3_paradox_ranges():
    _, found = art.paradox_ranges()
    assert found["p2"].intervals == ((22, 3062),)
    assert found["p2"].scan_cap == 4000
    assert found["bute2021"].intervals == ((26, 38),)


@pytest.mark.criterion("4 worst-case certificates S=2..5")
def test_criterion_4_certificates(table6):
    _, certs = art.certificates()
    assert all(c.ok for c in certs.values())
    s2 = certs[2]
    assert s2.after.quota == 335
    assert s2.after.winner_names() == ["C1", "C3"]
    assert certs[3].profile == construct_table6() == table6.profile
    assert [dict(r) for r in certs[3].before.rounds] == [dict(r) for r in tabulate(table6).rounds]
    assert certs[3].after.winner_names() == ["C1", "C4", "C5"]
    assert {certs[3].after.candidates[c]: v for c, v in certs[3].after.rounds[-1].items()} == {
        "C3": 759, "C4": 1121, "C5": 1125}


@pytest.mark.criterion("5 winner-overlap fuzz, 10,000 trials")
def test_criterion_5_overlap_fuzz():
    _, results = art.overlap_fuzz()
    assert sum(r.trials for r in results.values()) == 10_000
    failures = {seed: r.counterexample for seed, r in results.items() if not r.passed}
    assert not failures


@pytest.mark.criterion("6 oracle equivalence, 1,000 elections x 2 arithmetic modes")
def test_criterion_6_oracle():
    _, mismatches = art.oracle_comparison()
    assert mismatches == []


# --- criterion 7: external corpus ------------------------------------------------

def _slug(text):
    return re.sub(r"[^a-z0-9]", "", text.lower())


def _locate(blts, council, year, ward_number, ward_name):
    """Pick the imported file for one ward by council, year and ward number or name."""
    council_s, name_s = _slug(council), _slug(ward_name)
    ward_re = re.compile(rf"ward0*{ward_number}(?!\d)")
    for path, election in blts:
        hay = _slug(str(path)) + _slug(election.title)
        if council_s in hay and year in hay and (ward_re.search(hay) or (name_s and name_s in hay)):
            return election
    return None


@pytest.mark.criterion("7 corpus replication (needs the external Scottish dataset)")
def test_criterion_7_corpus(corpus_dir, tmp_path):
    result = import_scot(corpus_dir, tmp_path / "blt", default_seats=None)
    blts = [(p, read_blt(p)) for p in result.written]

    dunb = _locate(blts, "East Dunbartonshire", "2022", 4, "Bishopbriggs North and Campsie")
    assert dunb is not None, "East Dunbartonshire 2022 ward 4 not found"
    names = dunb.profile.names()
    ballot = parse_ranking("Hendry>McDiarmid>Williamson>Ferretti>Gallacher>Harris>Rowan>Pews", names)
    found = count_intervals(dunb, ballot, ParadoxKind.NEGATIVE, 4400)
    assert found.intervals == ((483, 4329),)
    pews, will = names.index("Pews"), names.index("Williamson")

    def margin(k):
        return penultimate_margin(tabulate(dunb.with_profile(add_ballots(dunb.profile, ballot, k))), pews, will)

    assert abs(margin(482) - (-7)) <= Fraction(1, 2)
    assert abs(margin(483) - 61) <= Fraction(1, 2)
    assert abs(margin(2000) - Fraction(3831, 10)) <= Fraction(1, 2)
    curve = dict(margin_curve(dunb, ballot, range(630, 641), pews, will))
    steps = {k: abs(curve[k + 1] - curve[k]) for k in range(630, 640)}
    assert max(steps, key=steps.get) in (634, 635)

    ruth = _locate(blts, "South Lanarkshire", "2022", 12, "Rutherglen Central and North")
    assert ruth is not None, "Rutherglen Central and North 2022 not found"
    ballot = parse_ranking("Cowan>Calikes>Lennon>Adebo>Fox>McRae>McGinty", ruth.profile.names())
    assert count_intervals(ruth, ballot, ParadoxKind.BOTH, 200).intervals == ((4, 59),)

    listed = json.loads((HERE / "data" / "listed_paradox_elections.json").read_text())
    hits = 0
    for entry in listed:
        election = _locate(blts, entry["council"], entry["year"], entry["ward_number"], entry["ward_name"])
        if election is None:
            continue
        findings = list(certify_sweep_hits(election, bullet_sweep(election)))
        if findings:
            hits += 1
        for f in findings:
            assert f.report.reverify(election, EngineConfig())
    assert hits >= 0.95 * len(listed)


# --- criterion 8: determinism ------------------------------------------------------

@pytest.mark.criterion("8 determinism of every artifact across runs")
def test_criterion_8_determinism(tmp_path):
    script = HERE / "acceptance_artifacts.py"
    procs = []
    for run in ("a", "b"):
        env = {**os.environ, "PYTHONHASHSEED": "1" if run == "a" else "2"}
        env.pop("STVPARADOX_TIE_SEED", None)
        procs.append(subprocess.Popen([sys.executable, str(script), str(tmp_path / run)], cwd=HERE, env=env))
    assert [p.wait() for p in procs] == [0, 0]
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    assert len(names) >= 20
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names, shallow=False)
    assert mismatch == [] and errors == []
    # the in-process build agrees with the subprocess ones
    files, _ = art.certificates()
    for name, text in files.items():
        assert (tmp_path / "a" / name).read_text(encoding="utf-8") == text
