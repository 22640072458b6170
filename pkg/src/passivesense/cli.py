"""Command-line entry point: ``passivesense <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 data error (diagnostics on stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import report, stats, synth
from .ingest import DEFAULT_SALT, HashConfig, parse_scan_log
from .model import StudySchedule, event_to_record, group_by_participant
from .social import parse_tz_offset


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser, needs_input=True):
    p.add_argument("--input", required=needs_input, help="scan log (JSONL); '-' for stdin")
    p.add_argument("--schedule", help="study schedule JSON")
    p.add_argument("--tz-offset", default="+10:00", help="local time offset, e.g. +10:00")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--seed", type=int, default=0)


def _ingest_flags(p):
    p.add_argument("--salt", default=DEFAULT_SALT.decode(), help="study-wide hashing salt")
    p.add_argument("--unsalted", action="store_true", help="hash MACs without a salt")
    p.add_argument("--no-filter-phones", dest="filter_phones", action="store_false",
                   help="keep non-phone Bluetooth devices")
    p.add_argument("--strict", action="store_true", help="exit 2 if any line is malformed")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="passivesense", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate and deidentify a scan log")
    _common(p)
    _ingest_flags(p)

    p = sub.add_parser("completeness", help="scheduled vs collected scans")
    _common(p)
    _ingest_flags(p)
    p.add_argument("--mode", choices=("mean", "pooled", "bluetooth", "gps"), default="mean")

    p = sub.add_parser("social", help="known/unknown Bluetooth hourly profiles")
    _common(p)
    _ingest_flags(p)
    p.add_argument("--min-days", type=int, default=3)
    p.add_argument("--missing-hours", choices=("zero", "exclude"), default="zero")

    p = sub.add_parser("mobility", help="location clusters and circadian movement")
    _common(p)
    _ingest_flags(p)
    p.add_argument("--max-gap-minutes", type=float, default=30.0)
    p.add_argument("--radius-m", type=float, default=500.0)
    p.add_argument("--k-max", type=int, default=50)
    p.add_argument("--cm-per-sample", action="store_true")
    p.add_argument("--stationary-only-cm", action="store_true")

    p = sub.add_parser("battery", help="discharge rates and battery-life model")
    _common(p)
    _ingest_flags(p)
    p.add_argument("--max-gap-minutes", type=float, default=30.0)

    p = sub.add_parser("stats", help="reliability / t-tests on a CSV table")
    _common(p)
    p.add_argument("--test", choices=("reliability", "paired", "two-sample", "welch"),
                   default="reliability")

    p = sub.add_parser("synth", help="generate a synthetic scan log and manifest")
    _common(p, needs_input=False)
    p.add_argument("--participants", type=int, default=8)
    p.add_argument("--clusters", type=int, help="fixed cluster count per participant")
    p.add_argument("--manifest", help="manifest path (default <out>.manifest.json)")
    p.add_argument("--delivery-android", type=float, default=0.55)
    p.add_argument("--delivery-ios", type=float, default=0.45)

    p = sub.add_parser("report", help="all analyses as one JSON document")
    _common(p)
    _ingest_flags(p)
    p.add_argument("--mode", choices=("mean", "pooled", "bluetooth", "gps"), default="mean")
    p.add_argument("--min-days", type=int, default=3)
    p.add_argument("--missing-hours", choices=("zero", "exclude"), default="zero")
    p.add_argument("--cm-per-sample", action="store_true")
    return parser


def _read_text(path: str, stdin) -> str:
    if path == "-":
        return stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: cannot read ({exc})") from None


def _load_events(args, stdin, stderr):
    cfg = HashConfig.without_salt() if args.unsalted else HashConfig(args.salt.encode())
    text = _read_text(args.input, stdin)
    events, errors = parse_scan_log(text.splitlines(), cfg, args.filter_phones)
    for e in errors:
        print(str(e), file=stderr)
    if errors and args.strict:
        raise DataError(f"{args.input}: {len(errors)} malformed line(s)")
    return events


def _tz(args) -> float:
    try:
        return parse_tz_offset(args.tz_offset)
    except (ValueError, IndexError) as exc:
        raise UsageError(f"--tz-offset: {exc}") from None


def _schedules(args, tz_h) -> report.Schedules:
    if not args.schedule:
        return report.Schedules(None, tz_h)
    try:
        doc = json.loads(_read_text(args.schedule, None))
        return report.Schedules(doc, tz_h)
    except (ValueError, KeyError, TypeError) as exc:
        raise DataError(f"{args.schedule}: invalid schedule ({exc})") from None


def _options(args, tz_h) -> report.Options:
    o = report.Options(tz_offset_h=tz_h, seed=args.seed)
    for name, attr in (("mode", "completeness_mode"), ("min_days", "min_days"),
                       ("missing_hours", "missing_hours"), ("max_gap_minutes", "max_gap_minutes"),
                       ("radius_m", "radius_m"), ("k_max", "k_max"),
                       ("cm_per_sample", "cm_per_sample"),
                       ("stationary_only_cm", "stationary_only_cm")):
        if hasattr(args, name):
            setattr(o, attr, getattr(args, name))
    return o


def _emit(text: str, args, stdout):
    if args.out and args.out != "-":
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise DataError(f"{args.out}: cannot write ({exc})") from None
    else:
        stdout.write(text)


def _flat_rows(command: str, doc: dict) -> list[dict]:
    if command == "completeness":
        return doc["rows"]
    if command == "social":
        return [{"participant_id": p["participant_id"], **row}
                for p in doc["participants"] for row in p["profile"]]
    if command == "mobility":
        return [{"participant_id": p["participant_id"], **c}
                for p in doc["participants"] for c in p["clusters"]]
    if command == "battery":
        return doc["observations"]
    raise UsageError(f"{command} has no CSV form")


def _read_table(text: str):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise DataError("empty table")
    header, body = rows[0], rows[1:]
    start = 1 if header and header[0].strip().lower() in ("participant_id", "id", "subject") else 0

    def num(s):
        s = s.strip()
        if s == "" or s.lower() in ("na", "nan", "null"):
            return None
        try:
            return float(s)
        except ValueError:
            raise DataError(f"non-numeric cell {s!r}") from None

    return header[start:], [[num(c) for c in r[start:]] for r in body if r]


def _stats_doc(args, stdin) -> dict:
    cols, rows = _read_table(_read_text(args.input, stdin))
    if args.test == "reliability":
        doc = report.reliability_doc(rows)
        if doc is None:
            raise DataError("need at least 2 complete rows and 2 columns")
        return {"conditions": cols, **doc}
    if len(cols) < 2:
        raise DataError("need two columns")
    a = [r[0] for r in rows if r[0] is not None]
    b = [r[1] for r in rows if len(r) > 1 and r[1] is not None]
    try:
        if args.test == "paired":
            pairs = [(r[0], r[1]) for r in rows if len(r) > 1 and None not in r[:2]]
            res = stats.paired_t([p[0] for p in pairs], [p[1] for p in pairs])
        else:
            res = stats.two_sample_t(a, b, welch=args.test == "welch")
    except ValueError as exc:
        raise DataError(str(exc)) from None
    return {"test": args.test, "columns": cols[:2], "t": res.t, "df": res.df, "p": res.p, "d": res.d}


def _synth(args, tz_h, stdout):
    sched = None
    if args.schedule:
        sched = StudySchedule.from_dict(json.loads(_read_text(args.schedule, None)))
    cfg = synth.SynthConfig(seed=args.seed, n_participants=args.participants, tz_offset_h=tz_h,
                            delivery_prob={"android": args.delivery_android,
                                           "ios": args.delivery_ios})
    if sched is not None:
        cfg.schedule = sched
    if args.clusters is not None:
        cfg.n_clusters = args.clusters
    try:
        lines, manifest = synth.generate(cfg)
    except ValueError as exc:
        raise UsageError(f"synth: {exc}") from None
    _emit("".join(line + "\n" for line in lines), args, stdout)
    man_path = args.manifest or (f"{args.out}.manifest.json" if args.out and args.out != "-" else None)
    if man_path:
        with open(man_path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def run(argv=None, stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        tz_h = _tz(args)
        if args.command == "synth":
            _synth(args, tz_h, stdout)
            return 0
        if args.command == "stats":
            doc = _stats_doc(args, stdin)
            _emit(report.dumps(doc) if args.format == "json" else report.to_csv([doc]), args, stdout)
            return 0
        events = _load_events(args, stdin, stderr)
        if args.command == "ingest":
            _emit("".join(json.dumps(event_to_record(e), sort_keys=True) + "\n" for e in events),
                  args, stdout)
            return 0
        schedules = _schedules(args, tz_h)
        opts = _options(args, tz_h)
        if args.command == "report":
            if args.format != "json":
                raise UsageError("report is JSON only")
            _emit(report.dumps(report.full_report(events, schedules, opts)), args, stdout)
            return 0
        groups = group_by_participant(events)
        section = getattr(report, f"{args.command}_section")(groups, schedules, opts)
        if args.format == "csv":
            _emit(report.to_csv(report.canonical(_flat_rows(args.command, section))), args, stdout)
        else:
            _emit(report.dumps(section), args, stdout)
        return 0
    except UsageError as exc:
        print(str(exc), file=stderr)
        return 1
    except DataError as exc:
        print(str(exc), file=stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
