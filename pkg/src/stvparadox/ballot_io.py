"""BLT ballot files, JSON traces and reports, votes-by-round tables.

BLT grammar accepted here::

    n s
    #total <V>          (optional, anywhere before the names)
    #title <text>       (optional, anywhere before the names)
    <count> <i1> <i2> ... 0
    ...
    0
    "Name (Party)"      (exactly n lines)
    "Title"             (optional)

Indices are 1-based in files and 0-based in memory. Output is always LF.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from .engine import (
    Arithmetic,
    EventKind,
    RoundEvent,
    TabulationRecord,
    TieDraw,
)
from .model import Ballot, Candidate, Election, Profile

log = logging.getLogger(__name__)

SCHEMA = "stvparadox/report"
SCHEMA_VERSION = 1
MAX_DECIMAL_DENOMINATOR = 10**12
PARTIES = ("Con", "Grn", "Ind", "Lab", "LD", "SNP")

_NAME_RE = re.compile(r'^"([^"]*)"(?:\s+"([^"]*)")?$')
_PARTY_RE = re.compile(r"^(.*\S)\s+\(([^()]+)\)$")


class BltParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _tokens(text: str):
    """(column, token) pairs for a whitespace-separated line, 1-based columns."""
    return [(m.start() + 1, m.group()) for m in re.finditer(r"[^ \t]+", text)]


def _parse_int(tok: str, line: int, col: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise BltParseError(f"expected {what}, got {tok!r}", line, col) from None


def split_party(label: str) -> tuple[str, str | None]:
    m = _PARTY_RE.match(label.strip())
    if m:
        return m.group(1), m.group(2)
    return label.strip(), None


def parse_blt(text: str) -> Election:
    lines = text.replace("\r\n", "\n").split("\n")
    pos = 0

    def next_line():
        nonlocal pos
        while pos < len(lines) and not lines[pos].strip():
            pos += 1
        if pos >= len(lines):
            return None, None
        pos += 1
        return pos, lines[pos - 1].rstrip()

    lineno, header = next_line()
    if header is None:
        raise BltParseError("empty file", 1)
    toks = _tokens(header)
    if len(toks) != 2:
        raise BltParseError("header must be '<candidates> <seats>'", lineno)
    n = _parse_int(toks[0][1], lineno, toks[0][0], "candidate count")
    seats = _parse_int(toks[1][1], lineno, toks[1][0], "seat count")
    if n <= 0 or seats <= 0:
        raise BltParseError("candidate and seat counts must be positive", lineno)
    if seats > n:
        raise BltParseError(f"{seats} seats for {n} candidates", lineno, toks[1][0])

    declared = None
    title = ""
    ballots: dict[Ballot, int] = {}
    terminated = False
    while True:
        lineno, line = next_line()
        if line is None:
            break
        stripped = line.strip()
        if stripped.startswith("#"):
            key, _, value = stripped[1:].partition(" ")
            if key == "total":
                declared = _parse_int(value.strip(), lineno, line.index(value) + 1 if value else 1, "voter total")
            elif key == "title":
                title = value.strip()
            else:
                raise BltParseError(f"unknown directive #{key}", lineno)
            continue
        toks = _tokens(line)
        if toks[0][1].startswith('"'):
            raise BltParseError("ballot section not terminated by a lone 0", lineno)
        if len(toks) == 1 and toks[0][1] == "0":
            terminated = True
            break
        col, tok = toks[0]
        count = _parse_int(tok, lineno, col, "ballot count")
        if count <= 0:
            raise BltParseError(f"ballot count must be positive, got {count}", lineno, col)
        if toks[-1][1] != "0":
            raise BltParseError("ballot line must end with 0", lineno, toks[-1][0])
        ranking = []
        for col, tok in toks[1:-1]:
            idx = _parse_int(tok, lineno, col, "candidate index")
            if not 1 <= idx <= n:
                raise BltParseError(f"candidate index {idx} outside 1..{n}", lineno, col)
            if idx - 1 in ranking:
                raise BltParseError(f"candidate {idx} appears twice on one ballot", lineno, col)
            ranking.append(idx - 1)
        if not ranking:
            raise BltParseError("ballot line ranks no candidates", lineno, col)
        b = Ballot(ranking)
        ballots[b] = ballots.get(b, 0) + count
    if not terminated:
        raise BltParseError("missing lone 0 terminating the ballot section", (lineno or len(lines)))

    roster = []
    for i in range(n):
        lineno, line = next_line()
        if line is None:
            raise BltParseError(f"expected {n} candidate names, found {i}", len(lines))
        m = _NAME_RE.match(line.strip())
        if not m:
            raise BltParseError("candidate name must be double-quoted", lineno)
        name, party = split_party(m.group(1))
        party = m.group(2) or party
        if not name:
            raise BltParseError("empty candidate name", lineno)
        roster.append(Candidate(i, name, party))
    lineno, line = next_line()
    if line is not None:
        m = _NAME_RE.match(line.strip())
        if not m:
            raise BltParseError("trailing content after candidate names", lineno)
        title = title or m.group(1)
        lineno, extra = next_line()
        if extra is not None:
            raise BltParseError("trailing content after title", lineno)
    if declared is not None and declared < sum(ballots.values()):
        raise BltParseError(f"#total {declared} is below the ballot sum {sum(ballots.values())}", 1)
    return Election(Profile(tuple(roster), ballots, declared), seats, title)


def read_blt(path) -> Election:
    return parse_blt(Path(path).read_text(encoding="utf-8"))


def write_blt(election: Election) -> str:
    p = election.profile
    out = [f"{p.n} {election.seats}"]
    if p.declared_total is not None:
        out.append(f"#total {p.declared_total}")
    for ballot, count in sorted(p.ballots.items()):
        out.append(" ".join([str(count), *(str(c + 1) for c in ballot.ranking), "0"]))
    out.append("0")
    for c in p.roster:
        label = f"{c.name} ({c.party})" if c.party else c.name
        out.append(f'"{label}"')
    if election.title:
        out.append(f'"{election.title}"')
    return "\n".join(out) + "\n"


# --- ranking strings --------------------------------------------------------

def parse_ranking(text: str, names: list[str]) -> Ballot:
    """Parse ``A>B>"Long Name">3`` using names or 1-based indices."""
    ids = []
    for part in text.split(">"):
        part = part.strip().strip('"').strip("'")
        if not part:
            raise ValueError(f"empty entry in ranking {text!r}")
        if part in names:
            ids.append(names.index(part))
        elif part.isdigit() and 1 <= int(part) <= len(names):
            ids.append(int(part) - 1)
        else:
            raise ValueError(f"unknown candidate {part!r}")
    return Ballot(ids)


def format_ranking(ballot: Ballot, names: list[str]) -> str:
    return ">".join(names[c] for c in ballot.ranking)


# --- values -----------------------------------------------------------------

def encode_value(v: Fraction | int) -> str:
    """Exact decimal string when the value terminates, else ``num/den``."""
    v = Fraction(v)
    d = v.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1 or v.denominator > MAX_DECIMAL_DENOMINATOR:
        return f"{v.numerator}/{v.denominator}"
    places = max(twos, fives)
    if places == 0:
        return str(v.numerator)
    scaled = v * 10**places
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled.numerator)).rjust(places + 1, "0")
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def decode_value(s: str) -> Fraction:
    return Fraction(s)


def round_half_up(v: Fraction, decimals: int) -> Decimal:
    """Round a non-negative exact value half-up to ``decimals`` places."""
    scaled = Fraction(v) * 10**decimals
    units = (2 * scaled.numerator + scaled.denominator) // (2 * scaled.denominator)
    return Decimal(units).scaleb(-decimals)


# --- round tables -------------------------------------------------------------

def render_round_table(record: TabulationRecord, decimals: int = 1) -> str:
    """Fixed-width votes-by-round table; ``*`` marks the total at election."""
    if not 0 <= decimals <= 5:
        raise ValueError("decimals must be in 0..5")
    elected_at = {}
    for e in record.events:
        if e.kind in (EventKind.ELECTED, EventKind.ELECTED_WITHOUT_QUOTA):
            elected_at[e.candidate] = e.round
    rows = []
    for cid, name in enumerate(record.candidates):
        cells = []
        for k, totals in enumerate(record.rounds, start=1):
            if cid not in totals:
                cells.append("")
                continue
            cell = str(round_half_up(totals[cid], decimals))
            if elected_at.get(cid) == k:
                cell += "*"
            cells.append(cell)
        rows.append((name, cells))
    heads = [f"R{k}" for k in range(1, len(record.rounds) + 1)]
    name_w = max(len("Candidate"), *(len(r[0]) for r in rows))
    widths = [max(len(h), *(len(r[1][i]) for r in rows)) for i, h in enumerate(heads)]
    lines = [f"Quota = {record.quota}"]
    lines.append("  ".join(["Candidate".ljust(name_w), *(h.rjust(w) for h, w in zip(heads, widths))]).rstrip())
    for name, cells in rows:
        lines.append("  ".join([name.ljust(name_w), *(c.rjust(w) for c, w in zip(cells, widths))]).rstrip())
    return "\n".join(lines) + "\n"


# --- JSON ---------------------------------------------------------------------

def record_to_dict(record: TabulationRecord, decimals: int = 2) -> dict:
    names = record.candidates
    return {
        "candidates": list(names),
        "seats": record.seats,
        "total_voters": record.total_voters,
        "quota": record.quota,
        "arithmetic": record.arithmetic.value,
        "tie_seed": record.tie_seed,
        "rounds": [{names[c]: encode_value(v) for c, v in totals.items()} for totals in record.rounds],
        "held_by_elected": [encode_value(v) for v in record.held_by_elected],
        "nontransferable": [encode_value(v) for v in record.nontransferable_by_round],
        "events": [
            {
                "kind": e.kind.value,
                "candidate": names[e.candidate],
                "round": e.round,
                **({"transfer_value": encode_value(e.transfer_value)} if e.transfer_value is not None else {}),
                **({"amounts": {names[c]: encode_value(v) for c, v in e.amounts}} if e.amounts else {}),
                **({"value": encode_value(e.value)} if e.value is not None else {}),
            }
            for e in record.events
        ],
        "tie_draws": [
            {"round": d.round, "purpose": d.purpose, "tied": [names[c] for c in d.tied],
             "chosen": names[d.chosen], "by_lot": d.by_lot}
            for d in record.tie_draws
        ],
        "winners": sorted(names[c] for c in record.winners),
        "ranking": [names[c] for c in record.ranking],
        "table": render_round_table(record, decimals).splitlines(),
    }


def record_from_dict(d: dict) -> TabulationRecord:
    names = list(d["candidates"])
    idx = {n: i for i, n in enumerate(names)}
    events = []
    for e in d["events"]:
        events.append(RoundEvent(
            EventKind(e["kind"]), idx[e["candidate"]], e["round"],
            decode_value(e["transfer_value"]) if "transfer_value" in e else None,
            tuple((idx[k], decode_value(v)) for k, v in e.get("amounts", {}).items()),
            decode_value(e["value"]) if "value" in e else None,
        ))
    return TabulationRecord(
        candidates=tuple(names),
        seats=d["seats"],
        total_voters=d["total_voters"],
        quota=d["quota"],
        rounds=tuple({idx[k]: decode_value(v) for k, v in r.items()} for r in d["rounds"]),
        held_by_elected=tuple(decode_value(v) for v in d["held_by_elected"]),
        nontransferable_by_round=tuple(decode_value(v) for v in d["nontransferable"]),
        events=tuple(events),
        winners=frozenset(idx[w] for w in d["winners"]),
        ranking=tuple(idx[r] for r in d["ranking"]),
        tie_draws=tuple(
            TieDraw(t["round"], t["purpose"], tuple(idx[c] for c in t["tied"]), idx[t["chosen"]], t["by_lot"])
            for t in d["tie_draws"]
        ),
        arithmetic=Arithmetic(d["arithmetic"]),
        tie_seed=d["tie_seed"],
    )


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def write_record_json(record: TabulationRecord, decimals: int = 2) -> str:
    return _dumps({"schema": SCHEMA, "version": SCHEMA_VERSION, "type": "tabulation",
                   **record_to_dict(record, decimals)})


def report_to_dict(report, count_range: tuple[int, int] | None = None, decimals: int = 2) -> dict:
    from .audit import ParadoxReport
    from .worst_case import ConstructionCertificate

    if isinstance(report, ConstructionCertificate):
        names = list(report.before.candidates)
        return {
            "schema": SCHEMA,
            "version": SCHEMA_VERSION,
            "type": "construction",
            "kind": "both",
            "seats": report.seats,
            "added_ballot": [names[c] for c in report.added_ballot.ranking],
            "added_count": report.added_count,
            "clauses": {"1": report.clause1_ok, "2": report.clause2_ok, "3": report.clause3_ok},
            "promoted": sorted(names[c] for c in report.after.winners - report.before.winners),
            "displaced": sorted(names[c] for c in report.before.winners - report.after.winners),
            "quota_before": report.before.quota,
            "quota_after": report.after.quota,
            "profile": [
                {"count": count, "ranking": [names[c] for c in b.ranking]}
                for b, count in report.profile.ballots.items()
            ],
            "before": record_to_dict(report.before, decimals),
            "after": record_to_dict(report.after, decimals),
        }
    if not isinstance(report, ParadoxReport):
        raise TypeError(f"cannot serialize {type(report).__name__}")
    names = list(report.before.candidates)
    out = {
        "schema": SCHEMA,
        "version": SCHEMA_VERSION,
        "type": "paradox",
        "kind": report.kind.value,
        "method": report.method,
        "added_ballot": [names[c] for c in report.added_ballot.ranking],
        "count": report.count,
    }
    if count_range is not None:
        out["count_range"] = [count_range[0], count_range[1]]
    out.update({
        "promoted": sorted(names[c] for c in report.promoted),
        "displaced": sorted(names[c] for c in report.displaced),
        "quota_before": report.before.quota,
        "quota_after": report.after.quota,
        "before": record_to_dict(report.before, decimals),
        "after": record_to_dict(report.after, decimals),
    })
    return out


def write_report_json(report, count_range: tuple[int, int] | None = None, decimals: int = 2) -> str:
    return _dumps(report_to_dict(report, count_range, decimals))


def read_report_json(text: str):
    """Inverse of :func:`write_report_json` for paradox reports."""
    from .audit import ParadoxKind, ParadoxReport

    d = json.loads(text)
    if d.get("schema") != SCHEMA:
        raise ValueError(f"not a {SCHEMA} document")
    if d["version"] != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {d['version']}")
    if d["type"] != "paradox":
        raise ValueError(f"read_report_json reads paradox reports, got {d['type']!r}")
    before = record_from_dict(d["before"])
    after = record_from_dict(d["after"])
    idx = {n: i for i, n in enumerate(before.candidates)}
    return ParadoxReport(
        kind=ParadoxKind(d["kind"]),
        added_ballot=Ballot(idx[c] for c in d["added_ballot"]),
        count=d["count"],
        promoted=frozenset(idx[c] for c in d["promoted"]),
        displaced=frozenset(idx[c] for c in d["displaced"]),
        before=before,
        after=after,
        method=d.get("method", "verify"),
    )


# --- CSV -----------------------------------------------------------------------

def write_margin_csv(curve: Iterable[tuple[int, Fraction]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["count", "margin"])
    for count, margin in curve:
        w.writerow([count, encode_value(margin)])
    return buf.getvalue()


# --- dataset import -------------------------------------------------------------

@dataclass
class ImportResult:
    written: list[Path]
    skipped: list[tuple[Path, str]]


def _parse_preflib(text: str, seats: int) -> Election:
    """PrefLib strict-order-incomplete data, in either the 2022 header format
    or the older numeric-prefix format."""
    lines = [l.strip() for l in text.splitlines() if l.strip()]
    names: dict[int, str] = {}
    rows = []
    title = ""
    if lines and lines[0].startswith("#"):
        for l in lines:
            if l.startswith("#"):
                m = re.match(r"#\s*ALTERNATIVE NAME (\d+):\s*(.*)", l)
                if m:
                    names[int(m.group(1))] = m.group(2)
                m = re.match(r"#\s*TITLE:\s*(.*)", l)
                if m:
                    title = m.group(1)
                continue
            count, _, rest = l.partition(":")
            if "{" in rest:
                raise ValueError(f"tied ranks are not supported: {l!r}")
            rows.append((int(count), [int(x) for x in rest.split(",") if x.strip()]))
    else:
        n = int(lines[0])
        for l in lines[1:n + 1]:
            i, _, name = l.partition(",")
            names[int(i)] = name.strip()
        for l in lines[n + 2:]:
            parts = [int(x) for x in l.split(",") if x.strip()]
            rows.append((parts[0], parts[1:]))
    order = sorted(names)
    pos = {k: i for i, k in enumerate(order)}
    roster = tuple(Candidate(i, *split_party(names[k])) for i, k in enumerate(order))
    ballots: dict[Ballot, int] = {}
    for count, ranking in rows:
        if not ranking:
            log.warning("skipping empty PrefLib ranking with count %d", count)
            continue
        b = Ballot(pos[r] for r in ranking)
        ballots[b] = ballots.get(b, 0) + count
    return Election(Profile(roster, ballots), seats, title)


def _parse_rank_csv(text: str, seats: int) -> Election:
    """CSV with a ``count`` column (optional) and rank columns holding candidate names."""
    reader = csv.reader(io.StringIO(text))
    header = [h.strip().lower() for h in next(reader)]
    count_col = header.index("count") if "count" in header else None
    rank_cols = [i for i, h in enumerate(header) if i != count_col]
    names: list[str] = []
    rows = []
    for row in reader:
        if not any(cell.strip() for cell in row):
            continue
        ranking = [row[i].strip() for i in rank_cols if i < len(row) and row[i].strip()]
        count = int(row[count_col]) if count_col is not None else 1
        seen = []
        for name in ranking:
            if name in seen:
                log.warning("dropping repeated mark for %s", name)
                continue
            seen.append(name)
            if name not in names:
                names.append(name)
        if seen:
            rows.append((count, seen))
    names.sort()
    return Election(Profile.from_rankings(names, rows), seats)


def import_scot(src, dest, default_seats: int | None = None) -> ImportResult:
    """Convert a directory of election files to canonical BLT.

    Reads ``.blt`` files (canonicalized), PrefLib ``.soi``/``.toi`` files and
    rank-column ``.csv`` files. Files whose seat count cannot be determined,
    or that fail to parse, are reported in ``skipped`` rather than guessed at.
    """
    src, dest = Path(src), Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    result = ImportResult([], [])
    for path in sorted(p for p in src.rglob("*") if p.is_file()):
        suffix = path.suffix.lower()
        try:
            text = path.read_text(encoding="utf-8-sig")
            if suffix == ".blt" or (suffix == ".csv" and re.match(r"\s*\d+\s+\d+\s*\n", text)):
                election = parse_blt(text)
            elif suffix in (".soi", ".toi"):
                if default_seats is None:
                    raise ValueError("PrefLib files carry no seat count; pass --seats")
                election = _parse_preflib(text, default_seats)
            elif suffix == ".csv":
                if default_seats is None:
                    raise ValueError("rank CSV files carry no seat count; pass --seats")
                election = _parse_rank_csv(text, default_seats)
            else:
                continue
        except (ValueError, KeyError, IndexError, UnicodeDecodeError) as exc:
            log.warning("skipping %s: %s", path, exc)
            result.skipped.append((path, str(exc)))
            continue
        out = dest / path.relative_to(src).with_suffix(".blt")
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(write_blt(election), encoding="utf-8")
        result.written.append(out)
    return result
