"""Command-line front end: ``gti weibull | compute | compare | plot``.

Exit codes: 1 for unreadable or malformed input files (and absent years),
2 for bad flags, 3 for requests outside the data's domain.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    DEFAULT_EPSILON,
    Classification,
    GtiResult,
    chord_areas,
    classify,
    cumulative_hazard,
    median_from_survival,
    survival_from_cumulative_hazard,
)
from .errors import DomainError, MedianNotReached, ParseError
from .hmd import (
    MX_COLUMNS,
    HazardSource,
    Sex,
    gti_at_cutoffs,
    hazard_from_life_table,
    hazard_from_mx_series,
    median_age_at_death,
    parse_hmd_life_table,
    parse_hmd_mx,
    select_year,
)
from .parametric import WeibullParams, discretize_hazard, weibull_gti_closed

# the shapes pair up as beta, 1/beta; the published "0.3" row is 1/3
TABLE1_BETAS = (5.0, 4.0, 3.0, 2.0, 1.0, 0.5, 1.0 / 3.0, 0.25, 0.2)
DEFAULT_CUTOFFS = (25.0, 65.0, 105.0)
ROW_COLUMNS = ("T", "gti", "survival", "h_eff", "class")

EXIT_PARSE = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3


class UsageError(Exception):
    pass


@dataclass
class ComputeReport:
    source_file: str
    year: int
    sex: Sex
    hazard_source: HazardSource
    rows: list[GtiResult] = field(default_factory=list)
    median_age_at_death: float | None = None

    def to_dict(self):
        return {
            "file": self.source_file,
            "year": self.year,
            "sex": str(self.sex),
            "hazard_source": str(self.hazard_source),
            "rows": [_row_dict(r) for r in self.rows],
            "median_age_at_death": self.median_age_at_death,
        }


def _row_dict(r: GtiResult):
    return {
        "T": r.cutoff_T,
        "gti": r.gti,
        "survival": r.survival_at_T,
        "h_eff": r.h_eff,
        "class": str(r.classification),
    }


def _g6(value):
    if value is None:
        return "-"
    return f"{value:.6g}"


def _render_table(header, rows):
    cells = [list(header)] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _render_csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _render_json(obj):
    return json.dumps(obj, indent=2) + "\n"


def _emit(text, out=None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# loading


def _is_mx_file(text):
    lines = text.splitlines()
    if len(lines) < 3:
        return False
    return tuple(t.lower() for t in lines[2].split()) == tuple(c.lower() for c in MX_COLUMNS)


def load_report(path, year, sex, cutoffs, source, epsilon) -> ComputeReport:
    """Parse ``path`` (life table or Mx file) and evaluate one year."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from None
    source = HazardSource(source)

    if _is_mx_file(text):
        if source is HazardSource.QX_IMPLIED:
            raise UsageError("--hazard-source qx needs a life-table file; death-rate files carry mx only")
        sex = Sex.parse(sex) if sex is not None else Sex.TOTAL
        series = select_year(parse_hmd_mx(text), year)
        h = hazard_from_mx_series(series, sex)
        try:
            median = median_from_survival(survival_from_cumulative_hazard(cumulative_hazard(h)))
        except MedianNotReached:
            median = None
    else:
        table = select_year(parse_hmd_life_table(text), year)
        if sex is not None and Sex.parse(sex) is not table.sex:
            raise DomainError(f"{path} holds the {table.sex} series, not {Sex.parse(sex)}")
        sex = table.sex
        h = hazard_from_life_table(table, source)
        try:
            median = median_age_at_death(table)
        except MedianNotReached:
            median = None

    rows = gti_at_cutoffs(h, cutoffs, epsilon)
    return ComputeReport(str(path), year, sex, source, rows, median)


def _load_hazard(path, year, sex, source):
    text = Path(path).read_text(encoding="utf-8")
    if _is_mx_file(text):
        return hazard_from_mx_series(select_year(parse_hmd_mx(text), year), sex or Sex.TOTAL)
    return hazard_from_life_table(select_year(parse_hmd_life_table(text), year), source)


# ---------------------------------------------------------------------------
# subcommands


def weibull_label(value, epsilon=DEFAULT_EPSILON):
    cls = classify(value, epsilon)
    return "Constant mortality rate" if cls is Classification.NON_AGEING else str(cls)


def cmd_weibull(args):
    betas = args.beta or list(TABLE1_BETAS)
    bad = [b for b in betas if not b > 0]
    if bad:
        raise UsageError(f"--beta must be positive, got {bad[0]:g}")
    values = [(b, weibull_gti_closed(b)) for b in betas]
    if args.format == "json":
        rows = [{"beta": b, "gti": v, "class": weibull_label(v, args.epsilon)} for b, v in values]
        _emit(_render_json(rows), args.out)
    elif args.format == "csv":
        rows = [(repr(b), repr(v), weibull_label(v, args.epsilon)) for b, v in values]
        _emit(_render_csv(("beta", "gti", "class"), rows), args.out)
    else:
        rows = [(_g6(b), _g6(v), weibull_label(v, args.epsilon)) for b, v in values]
        _emit(_render_table(("beta", "GTI", "lifetime distribution"), rows), args.out)


def cmd_compute(args):
    report = load_report(args.file[0], args.year[0], args.sex, args.cutoff, args.hazard_source, args.epsilon)
    if args.format == "csv":
        rows = [
            (repr(r.cutoff_T), repr(r.gti), repr(r.survival_at_T), repr(r.h_eff), str(r.classification))
            for r in report.rows
        ]
        _emit(_render_csv(ROW_COLUMNS, rows), args.out)
    elif args.format == "table":
        rows = [
            (_g6(r.cutoff_T), _g6(r.gti), _g6(r.survival_at_T), _g6(r.h_eff), str(r.classification))
            for r in report.rows
        ]
        text = _render_table(ROW_COLUMNS, rows)
        text += f"median age at death: {_g6(report.median_age_at_death)}\n"
        _emit(text, args.out)
    else:
        _emit(_render_json(report.to_dict()), args.out)


class InputError(Exception):
    """Wraps an error from one of several inputs, naming which."""

    def __init__(self, tag, path, cause):
        self.cause = cause
        super().__init__(f"input {tag} ({path}): {cause}")


def _pair_inputs(files, years):
    if len(years) != 2:
        raise UsageError("compare needs exactly two --year values")
    if len(files) == 1:
        files = files * 2
    if len(files) != 2:
        raise UsageError("compare needs one --file, or one per --year")
    return list(zip(("a", "b"), files, years))


def cmd_compare(args):
    reports = []
    for tag, path, year in _pair_inputs(args.file, args.year):
        try:
            reports.append(load_report(path, year, args.sex, args.cutoff, args.hazard_source, args.epsilon))
        except (ParseError, DomainError, UsageError) as exc:
            raise InputError(tag, path, exc) from exc
    a, b = reports
    joined = [(ra, rb, rb.gti - ra.gti) for ra, rb in zip(a.rows, b.rows)]

    if args.format == "json":
        obj = {
            "a": a.to_dict(),
            "b": b.to_dict(),
            "rows": [
                {"T": ra.cutoff_T, "gti_a": ra.gti, "gti_b": rb.gti, "survival_a": ra.survival_at_T,
                 "survival_b": rb.survival_at_T, "delta": d}
                for ra, rb, d in joined
            ],
        }
        _emit(_render_json(obj), args.out)
        return
    header = ("T", "gti_a", "survival_a", "gti_b", "survival_b", "delta")
    if args.format == "csv":
        rows = [tuple(repr(x) for x in (ra.cutoff_T, ra.gti, ra.survival_at_T, rb.gti, rb.survival_at_T, d))
                for ra, rb, d in joined]
        _emit(_render_csv(header, rows), args.out)
        return
    rows = [tuple(_g6(x) for x in (ra.cutoff_T, ra.gti, ra.survival_at_T, rb.gti, rb.survival_at_T, d))
            for ra, rb, d in joined]
    rows.append(("median", _g6(a.median_age_at_death), "", _g6(b.median_age_at_death), "", ""))
    text = f"a: {a.source_file} {a.year} {a.sex}\nb: {b.source_file} {b.year} {b.sex}\n"
    _emit(text + _render_table(header, rows), args.out)


def _chord(args):
    if len(args.cutoff) != 1:
        raise UsageError("chord plot needs exactly one --cutoff")
    T = args.cutoff[0]
    if args.beta:
        if len(args.beta) != 1:
            raise UsageError("chord plot takes a single --beta")
        if not args.beta[0] > 0:
            raise UsageError(f"--beta must be positive, got {args.beta[0]:g}")
        h = discretize_hazard(WeibullParams(args.beta[0], args.eta), T, args.steps)
    elif args.file and args.year:
        h = _load_hazard(args.file[0], args.year[0], args.sex, HazardSource(args.hazard_source))
    else:
        raise UsageError("chord plot needs --beta, or --file with --year")
    H = cumulative_hazard(h)
    area, triangle = chord_areas(H, T)
    mask = H.knots <= T
    t = H.knots[mask]
    if t[-1] != T:
        t = np.append(t, T)
    Ht = H(t)
    slope = float(H(T)) / T
    rows = [(repr(float(ti)), repr(float(hi)), repr(float(slope * ti))) for ti, hi in zip(t, Ht)]
    Path(args.out).write_text(_render_csv(("t", "H", "h_eff_t"), rows), encoding="utf-8")
    sys.stdout.write(f"A={area!r}\nA+B={triangle!r}\nGTI={1.0 - area / triangle!r}\n")


def _rates(args):
    if not args.file or not args.year:
        raise UsageError("rates plot needs --file and --year")
    files = args.file
    if len(files) == 1:
        files = files * len(args.year)
    if len(files) != len(args.year):
        raise UsageError("give one --file, or one per --year")
    columns = {}
    for path, year in zip(files, args.year):
        h = _load_hazard(path, year, args.sex, HazardSource.MX_DIRECT)
        name, k = f"mx_{year}", 2
        while name in columns:
            name, k = f"mx_{year}_{k}", k + 1
        columns[name] = dict(zip(h.knots.astype(int).tolist(), h.rates.tolist()))
    ages = sorted(set().union(*columns.values()))
    rows = [[str(age)] + [repr(col[age]) if age in col else "" for col in columns.values()] for age in ages]
    Path(args.out).write_text(_render_csv(["age", *columns], rows), encoding="utf-8")


def cmd_plot(args):
    if args.kind == "chord":
        _chord(args)
    else:
        _rates(args)


# ---------------------------------------------------------------------------
# argument parsing


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _common(p, cutoff_default=True):
    p.add_argument("--file", action="append", default=[], help="HMD life-table or Mx_1x1 file")
    p.add_argument("--year", action="append", type=int, default=[])
    p.add_argument("--sex", choices=("female", "male", "total"), default=None,
                   help="series to use (default: the file's own, or total)")
    p.add_argument("--cutoff", action="append", type=float, default=None,
                   help="cut-off age T, repeatable (default 25 65 105)")
    p.add_argument("--hazard-source", choices=("mx", "qx"), default="mx")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON,
                   help="classification tolerance around 0")
    p.add_argument("--out", help="write to this file instead of standard output")


def build_parser():
    parser = argparse.ArgumentParser(prog="gti", description="Gini-type ageing index from mortality data")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weibull", help="closed-form index for Weibull shapes")
    p.add_argument("--beta", action="append", type=float, default=None)
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--out")
    p.set_defaults(func=cmd_weibull)

    p = sub.add_parser("compute", help="index at cut-off ages for one year")
    _common(p)
    p.add_argument("--format", choices=("json", "csv", "table"), default="json")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("compare", help="two years side by side")
    _common(p)
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("plot", help="write plot data as CSV")
    p.add_argument("kind", choices=("chord", "rates"))
    _common(p)
    p.add_argument("--beta", action="append", type=float, default=None,
                   help="chord only: Weibull shape instead of a file")
    p.add_argument("--eta", type=_positive_float, default=1.0, help="Weibull scale")
    p.add_argument("--steps", type=int, default=10_000, help="Weibull discretization steps")
    p.set_defaults(func=cmd_plot)
    return parser


def _validate(parser, args):
    if args.command in ("compute", "plot", "compare"):
        if args.epsilon < 0:
            parser.error("--epsilon must be nonnegative")
    if args.command == "compute":
        if len(args.file) != 1 or len(args.year) != 1:
            parser.error("compute needs exactly one --file and one --year")
    if args.command == "plot":
        if args.kind == "chord" and args.cutoff is None:
            parser.error("chord plot needs --cutoff")
        if not args.out:
            parser.error("plot needs --out")
        if args.steps < 1:
            parser.error("--steps must be at least 1")
    if getattr(args, "cutoff", None) is None and args.command != "weibull":
        args.cutoff = list(DEFAULT_CUTOFFS)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"gti: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"gti: error: {exc}", file=sys.stderr)
        if isinstance(exc.cause, UsageError):
            return EXIT_USAGE
        return EXIT_PARSE if isinstance(exc.cause, ParseError) else EXIT_DOMAIN
    except ParseError as exc:
        print(f"gti: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"gti: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"gti: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return 0


if __name__ == "__main__":
    sys.exit(main())
