"""Command-line front end.

Exit codes: 0 ran clean, 1 a paradox was found (audit, sweep), 2 usage or
input error.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
from fractions import Fraction

from . import audit, ballot_io, worst_case
from .engine import Arithmetic, EngineConfig, tabulate
from .model import Election

TIE_SEED_ENV = "STVPARADOX_TIE_SEED"
EXIT_OK, EXIT_PARADOX, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _count_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        lo_i = int(lo)
        hi_i = int(hi) if sep else lo_i
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LO..HI, got {text!r}") from None
    if lo_i <= 0 or hi_i < lo_i:
        raise argparse.ArgumentTypeError(f"bad count range {text!r}")
    return lo_i, hi_i


def _default_seed() -> int:
    raw = os.environ.get(TIE_SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{TIE_SEED_ENV}={raw!r} is not an integer") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stvparadox", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def election_args(p):
        p.add_argument("file", help="BLT ballot file")
        p.add_argument("--seats", type=int, help="seat count (must match the file unless --force)")
        p.add_argument("--force", action="store_true", help="allow --seats to override the file header")
        p.add_argument("--quota", type=int, help="use this quota instead of the computed one")
        p.add_argument("--arithmetic", choices=[a.value for a in Arithmetic], default="exact")
        p.add_argument("--tie-seed", type=int, default=None, help=f"lot seed (default ${TIE_SEED_ENV} or 0)")

    p = sub.add_parser("tabulate", help="count an election")
    election_args(p)
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.add_argument("--decimals", type=int, default=2, choices=range(6))

    p = sub.add_parser("audit", help="verify an added-ballot paradox or scan a count range")
    election_args(p)
    p.add_argument("--ballot", required=True, help='ranking such as "A>B>D>C" (names or 1-based indices)')
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--count", type=_count_range, help="N or LO..HI")
    group.add_argument("--counts", type=_count_range, dest="count", help="alias of --count")
    p.add_argument("--kind", choices=[k.value for k in audit.ParadoxKind], default="negative")
    p.add_argument("--format", choices=["table", "json"], default="table")

    p = sub.add_parser("sweep", help="bullet-vote search for winner-set changes")
    election_args(p)
    p.add_argument("--cap-factor", type=Fraction, default=Fraction(2))
    p.add_argument("--cap-floor", type=int, default=0, help="cap for candidates with no bullet votes")
    p.add_argument("--complete", action="store_true", help="try to certify hits with full rankings")
    p.add_argument("--scan-cap", type=int, default=None)
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("curve", help="penultimate-round margin as CSV")
    election_args(p)
    p.add_argument("--ballot", required=True)
    p.add_argument("--a", required=True, help="candidate whose margin is reported")
    p.add_argument("--b", required=True, help="opponent")
    p.add_argument("--counts", type=_count_range, required=True)

    p = sub.add_parser("construct", help="worst-case profile for S seats")
    p.add_argument("--seats", type=int, required=True)
    p.add_argument("--verify", action="store_true", help="emit an engine-verified certificate")
    p.add_argument("--max-seats", type=int, default=worst_case.DEFAULT_MAX_SEATS)
    p.add_argument("--arithmetic", choices=[a.value for a in Arithmetic], default="exact")
    p.add_argument("--tie-seed", type=int, default=None)

    p = sub.add_parser("import-scot", help="convert a directory of election files to BLT")
    p.add_argument("dir")
    p.add_argument("--out", required=True)
    p.add_argument("--seats", type=int, default=None, help="seat count for formats that lack one")
    return parser


def _config(args) -> EngineConfig:
    seed = args.tie_seed if args.tie_seed is not None else _default_seed()
    return EngineConfig(Arithmetic(args.arithmetic), seed, getattr(args, "quota", None))


def _load(args) -> Election:
    try:
        election = ballot_io.read_blt(args.file)
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    if args.seats is not None and args.seats != election.seats:
        if not args.force:
            raise UsageError(f"file declares {election.seats} seats; pass --force to use {args.seats}")
        election = Election(election.profile, args.seats, election.title)
    return election


def _header(config: EngineConfig) -> str:
    return f"# arithmetic: {config.arithmetic.value}  tie_seed: {config.tie_seed}\n"


def cmd_tabulate(args, out) -> int:
    election, config = _load(args), _config(args)
    record = tabulate(election, config)
    if args.format == "json":
        out.write(ballot_io.write_record_json(record, args.decimals))
        return EXIT_OK
    out.write(_header(config))
    out.write(ballot_io.render_round_table(record, args.decimals))
    out.write(f"Winners: {', '.join(record.winner_names())}\n")
    return EXIT_OK


def cmd_audit(args, out) -> int:
    election, config = _load(args), _config(args)
    ballot = ballot_io.parse_ranking(args.ballot, election.profile.names())
    kind = audit.ParadoxKind(args.kind)
    lo, hi = args.count
    names = election.profile.names()
    if lo == hi:
        report = audit.verify(election, ballot, lo, kind, config)
        if args.format == "json":
            out.write(ballot_io.write_report_json(report) if report else '{"paradox": false}\n')
        else:
            out.write(_header(config))
            if report:
                out.write(f"{report.kind.value} involvement at count {lo}: "
                          f"promoted {sorted(names[c] for c in report.promoted)}, "
                          f"displaced {sorted(names[c] for c in report.displaced)}\n")
            else:
                out.write(f"no {kind.value} involvement paradox at count {lo}\n")
        return EXIT_PARADOX if report else EXIT_OK
    found = audit.count_intervals(election, ballot, kind, hi, config, start=lo)
    if args.format == "json":
        out.write(json.dumps({
            "ballot": [names[c] for c in ballot.ranking], "kind": kind.value,
            "scan": [lo, hi], "intervals": [list(i) for i in found.intervals],
            "tie_seed": config.tie_seed, "arithmetic": config.arithmetic.value,
        }, indent=2) + "\n")
    else:
        out.write(_header(config))
        for a, b in found.intervals:
            out.write(f"{kind.value}: [{a}, {b}]\n")
        if not found:
            out.write(f"no {kind.value} involvement paradox for counts {lo}..{hi}\n")
    return EXIT_PARADOX if found else EXIT_OK


def cmd_sweep(args, out) -> int:
    election, config = _load(args), _config(args)
    names = election.profile.names()
    hits = audit.bullet_sweep(election, args.cap_factor, config, args.cap_floor)
    findings = list(audit.certify_sweep_hits(election, hits, config, args.scan_cap)) if args.complete else []
    if args.format == "json":
        doc = {
            "tie_seed": config.tie_seed,
            "arithmetic": config.arithmetic.value,
            "method": "sweep",
            "hits": [{"candidate": names[h.candidate], "count": h.count,
                      "before": sorted(names[c] for c in h.before),
                      "after": sorted(names[c] for c in h.after)} for h in hits],
            "reports": [ballot_io.report_to_dict(f.report, f.intervals.intervals[0] if f.intervals else None)
                        | {"intervals": [list(i) for i in f.intervals.intervals]} for f in findings],
        }
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        out.write(_header(config))
        out.write("candidate,count,before,after\n")
        for h in hits:
            out.write(f"{names[h.candidate]},{h.count},{'|'.join(sorted(names[c] for c in h.before))},"
                      f"{'|'.join(sorted(names[c] for c in h.after))}\n")
        for f in findings:
            spans = " ".join(f"[{a},{b}]" for a, b in f.intervals.intervals)
            out.write(f"# {f.report.kind.value}: {ballot_io.format_ranking(f.report.added_ballot, names)} {spans}\n")
    return EXIT_PARADOX if findings else EXIT_OK


def cmd_curve(args, out) -> int:
    election, config = _load(args), _config(args)
    names = election.profile.names()
    ballot = ballot_io.parse_ranking(args.ballot, names)
    a = ballot_io.parse_ranking(args.a, names).top
    b = ballot_io.parse_ranking(args.b, names).top
    lo, hi = args.counts
    out.write(ballot_io.write_margin_csv(audit.margin_curve(election, ballot, range(lo, hi + 1), a, b, config)))
    return EXIT_OK


def cmd_construct(args, out) -> int:
    config = _config(args)
    if args.verify:
        cert = worst_case.verify_construction(args.seats, config, args.max_seats)
        out.write(ballot_io.write_report_json(cert))
        return EXIT_OK
    profile, ballot, count = worst_case.build_construction(args.seats, args.max_seats)
    out.write(f"# add {count} x {ballot_io.format_ranking(ballot, profile.names())}\n")
    out.write(ballot_io.write_blt(Election(profile, args.seats)))
    return EXIT_OK


def cmd_import(args, out) -> int:
    result = ballot_io.import_scot(args.dir, args.out, args.seats)
    for path in result.written:
        out.write(f"{path}\n")
    for path, reason in result.skipped:
        print(f"skipped {path}: {reason}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "tabulate": cmd_tabulate,
    "audit": cmd_audit,
    "sweep": cmd_sweep,
    "curve": cmd_curve,
    "construct": cmd_construct,
    "import-scot": cmd_import,
}


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    # buffer so a failure never leaves partial output behind
    buf = io.StringIO()
    try:
        code = COMMANDS[args.command](args, buf)
    except (UsageError, ValueError, KeyError, worst_case.ConstructionError) as exc:
        print(f"stvparadox: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out.write(buf.getvalue())
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
