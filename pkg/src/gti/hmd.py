"""Human Mortality Database period tables: parsing and derived curves.

Two single-year (1x1) text products are understood:

* life tables (``bltper_1x1``, ``fltper_1x1``, ``mltper_1x1``) with columns
  ``Year Age mx qx ax lx dx Lx Tx ex``;
* death rates (``Mx_1x1``) with columns ``Year Age Female Male Total``.

Both start with a free-text title line and a blank line before the column
header. Ages run ``0, 1, ...`` and end with one open-ended row such as
``110+``. HMD writes ``.`` where a value is unavailable.
"""

from __future__ import annotations

import enum
import io
import warnings
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import (
    DEFAULT_EPSILON,
    GtiResult,
    HazardCurve,
    SurvivalCurve,
    cumulative_hazard,
    gti,
)
from .errors import (
    CutoffOutOfDomain,
    MalformedHeader,
    MalformedRow,
    MedianNotReached,
    MissingDatum,
    NonContiguousAges,
    NonMonotoneLx,
    UnitProbability,
    YearNotFound,
    ZeroRadix,
)

LIFE_TABLE_COLUMNS = ("Year", "Age", "mx", "qx", "ax", "lx", "dx", "Lx", "Tx", "ex")
MX_COLUMNS = ("Year", "Age", "Female", "Male", "Total")
MISSING = "."


class Sex(str, enum.Enum):
    FEMALE = "Female"
    MALE = "Male"
    TOTAL = "Total"

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise ValueError(f"unknown sex {value!r}; expected female, male or total")


class HazardSource(str, enum.Enum):
    """Which life-table column supplies the mortality rate."""

    MX_DIRECT = "mx"
    QX_IMPLIED = "qx"

    def __str__(self):
        return self.value


class SurvivalTruncated(UserWarning):
    """Trailing ages with zero survivors were dropped from a survival curve."""


class LifeTableRow(NamedTuple):
    age_start: int
    is_open_ended: bool
    mx: float
    qx: float
    ax: float
    lx: float
    dx: float
    Lx: float
    Tx: float
    ex: float


@dataclass(frozen=True, eq=False)
class LifeTable:
    year: int
    sex: Sex
    rows: tuple[LifeTableRow, ...]
    line_numbers: tuple[int, ...] = field(default=(), repr=False)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    @property
    def ages(self):
        return np.array([r.age_start for r in self.rows], dtype=int)

    @property
    def mx(self):
        return self.column("mx")

    @property
    def qx(self):
        return self.column("qx")

    @property
    def lx(self):
        return self.column("lx")

    @property
    def open_age(self) -> int:
        return self.rows[-1].age_start


@dataclass(frozen=True, eq=False)
class MortalityRateSeries:
    year: int
    ages: np.ndarray
    rates: dict
    line_numbers: tuple[int, ...] = field(default=(), repr=False)

    @property
    def open_age(self) -> int:
        return int(self.ages[-1])

    def for_sex(self, sex) -> np.ndarray:
        return self.rates[Sex.parse(sex)]


# ---------------------------------------------------------------------------
# parsing


def _read_text(source):
    if isinstance(source, str):
        return source
    if hasattr(source, "read"):
        return source.read()
    raise TypeError("expected text or a readable text stream")


def _split_header(lines, expected):
    if len(lines) < 3:
        raise MalformedHeader("expected a title line, a blank line and a column header", len(lines) + 1)
    if lines[1].strip():
        raise MalformedHeader("line 2 must be blank", 2)
    tokens = lines[2].split()
    if tuple(t.lower() for t in tokens) != tuple(c.lower() for c in expected):
        raise MalformedHeader(
            f"expected columns {' '.join(expected)!r}, found {' '.join(tokens)!r}", 3
        )


def _parse_age(token, line_no):
    is_open = token.endswith("+")
    digits = token[:-1] if is_open else token
    if not digits.isdigit():
        raise MalformedRow(f"bad age token {token!r}", line_no)
    return int(digits), is_open


def _parse_number(token, name, line_no):
    if token == MISSING:
        raise MissingDatum(f"missing value for {name}", line_no)
    try:
        value = float(token)
    except ValueError:
        raise MalformedRow(f"cannot parse {name}={token!r} as a number", line_no) from None
    if not np.isfinite(value):
        raise MalformedRow(f"{name}={token!r} is not finite", line_no)
    return value


def _parse_year(token, line_no):
    try:
        return int(token)
    except ValueError:
        raise MalformedRow(f"bad year token {token!r}", line_no) from None


def _data_rows(lines, ncols):
    """Yield ``(line_no, tokens)`` for each data line after the header."""
    for offset, line in enumerate(lines[3:]):
        line_no = offset + 4
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != ncols:
            raise MalformedRow(f"expected {ncols} columns, found {len(tokens)}", line_no)
        yield line_no, tokens


class _AgeTracker:
    """Checks that each year's ages run 0, 1, ... and close with one open row."""

    def __init__(self):
        self.closed = set()
        self.year = None
        self.next_age = 0
        self.open_seen = False
        self.last_line = None

    def feed(self, year, age, is_open, line_no):
        if year != self.year:
            self.finish()
            if year in self.closed:
                raise NonContiguousAges(year, "rows for this year are not consecutive", line_no)
            self.year, self.next_age, self.open_seen = year, 0, False
        if self.open_seen:
            raise NonContiguousAges(year, f"age {age} follows the open-ended row", line_no)
        if age != self.next_age:
            raise NonContiguousAges(year, f"expected age {self.next_age}, found {age}", line_no)
        self.next_age += 1
        self.open_seen = is_open
        self.last_line = line_no

    def finish(self):
        if self.year is None:
            return
        if not self.open_seen:
            raise NonContiguousAges(self.year, "table has no open-ended final row", self.last_line)
        self.closed.add(self.year)


def _sex_from_title(title):
    lowered = title.lower()
    # "female" contains "male", so test it first
    if "female" in lowered:
        return Sex.FEMALE
    if "male" in lowered:
        return Sex.MALE
    return Sex.TOTAL


def parse_hmd_life_table(source, sex=None) -> list[LifeTable]:
    """Parse an HMD 1x1 period life table into one :class:`LifeTable` per year.

    ``sex`` defaults to the one named in the title line (``Total`` if none is).
    Years are returned in file order.
    """
    lines = _read_text(source).splitlines()
    _split_header(lines, LIFE_TABLE_COLUMNS)
    sex = Sex.parse(sex) if sex is not None else _sex_from_title(lines[0])

    tracker = _AgeTracker()
    grouped: dict[int, list] = {}
    for line_no, tokens in _data_rows(lines, len(LIFE_TABLE_COLUMNS)):
        year = _parse_year(tokens[0], line_no)
        age, is_open = _parse_age(tokens[1], line_no)
        tracker.feed(year, age, is_open, line_no)
        nums = [_parse_number(tok, name, line_no) for tok, name in zip(tokens[2:], LIFE_TABLE_COLUMNS[2:])]
        row = LifeTableRow(age, is_open, *nums)
        if any(v < 0 for v in nums):
            raise MalformedRow("life-table values must be nonnegative", line_no)
        if row.qx > 1:
            raise MalformedRow(f"qx={row.qx:g} exceeds 1", line_no)
        rows = grouped.setdefault(year, [])
        if rows:
            prev_lx = rows[-1][1].lx
            if row.lx > prev_lx:
                raise NonMonotoneLx(year, f"lx rises from {prev_lx:g} to {row.lx:g} at age {age}", line_no)
        elif row.lx <= 0:
            raise MalformedRow("radix lx at age 0 must be positive", line_no)
        rows.append((line_no, row))
    tracker.finish()

    return [
        LifeTable(
            year=year,
            sex=sex,
            rows=tuple(r for _, r in rows),
            line_numbers=tuple(n for n, _ in rows),
        )
        for year, rows in grouped.items()
    ]


def parse_hmd_mx(source) -> list[MortalityRateSeries]:
    """Parse an HMD ``Mx_1x1`` death-rate file, one series per year."""
    lines = _read_text(source).splitlines()
    _split_header(lines, MX_COLUMNS)

    tracker = _AgeTracker()
    grouped: dict[int, list] = {}
    for line_no, tokens in _data_rows(lines, len(MX_COLUMNS)):
        year = _parse_year(tokens[0], line_no)
        age, is_open = _parse_age(tokens[1], line_no)
        tracker.feed(year, age, is_open, line_no)
        nums = [_parse_number(tok, name, line_no) for tok, name in zip(tokens[2:], MX_COLUMNS[2:])]
        if any(v < 0 for v in nums):
            raise MalformedRow("death rates must be nonnegative", line_no)
        grouped.setdefault(year, []).append((line_no, age, nums))
    tracker.finish()

    series = []
    for year, rows in grouped.items():
        values = np.array([r[2] for r in rows], dtype=float)
        series.append(
            MortalityRateSeries(
                year=year,
                ages=np.array([r[1] for r in rows], dtype=int),
                rates={sex: values[:, i] for i, sex in enumerate(Sex)},
                line_numbers=tuple(r[0] for r in rows),
            )
        )
    return series


def select_year(tables: Sequence, year: int):
    for table in tables:
        if table.year == year:
            return table
    raise YearNotFound(year, [t.year for t in tables])


# ---------------------------------------------------------------------------
# writers (fixtures and round trips)


def _fmt(value):
    return repr(float(value))


def _age_token(age, is_open):
    return f"{age}+" if is_open else str(age)


def format_hmd_life_table(tables: Iterable[LifeTable], title="Synthetic, Life tables (period 1x1), Total") -> str:
    out = io.StringIO()
    out.write(title + "\n\n")
    out.write("  ".join(f"{c:>10}" for c in LIFE_TABLE_COLUMNS) + "\n")
    for table in tables:
        for r in table.rows:
            cells = [str(table.year), _age_token(r.age_start, r.is_open_ended)]
            cells += [_fmt(v) for v in r[2:]]
            out.write("  ".join(f"{c:>10}" for c in cells) + "\n")
    return out.getvalue()


def format_hmd_mx(series: Iterable[MortalityRateSeries], title="Synthetic, Death rates (period 1x1)") -> str:
    out = io.StringIO()
    out.write(title + "\n\n")
    out.write("  ".join(f"{c:>10}" for c in MX_COLUMNS) + "\n")
    for s in series:
        last = len(s.ages) - 1
        for i, age in enumerate(s.ages):
            cells = [str(s.year), _age_token(int(age), i == last)]
            cells += [_fmt(s.rates[sex][i]) for sex in Sex]
            out.write("  ".join(f"{c:>10}" for c in cells) + "\n")
    return out.getvalue()


def synthetic_life_table(year, mx, sex=Sex.TOTAL, radix=100000.0, ax=0.5) -> LifeTable:
    """Internally consistent table from per-age death rates.

    ``mx[-1]`` is the open-ended rate. Within each year the hazard is taken as
    constant, so ``qx = 1 - exp(-mx)`` and ``lx[x+1] = lx[x] * (1 - qx)``.
    """
    mx = np.asarray(mx, dtype=float)
    n = mx.size
    qx = -np.expm1(-mx)
    qx[-1] = 1.0
    lx = radix * np.concatenate(([1.0], np.cumprod(1.0 - qx[:-1])))
    dx = lx * qx
    Lx = np.where(mx > 0, dx / np.where(mx > 0, mx, 1.0), lx)
    Tx = np.cumsum(Lx[::-1])[::-1]
    ex = Tx / lx
    rows = tuple(
        LifeTableRow(i, i == n - 1, mx[i], qx[i], ax, lx[i], dx[i], Lx[i], Tx[i], ex[i])
        for i in range(n)
    )
    return LifeTable(year=year, sex=Sex.parse(sex), rows=rows)


# ---------------------------------------------------------------------------
# derived curves


def hazard_from_rates(rates) -> HazardCurve:
    """Unit-width steps ``[x, x+1)`` for ``x = 0 .. len(rates)-1``."""
    rates = np.asarray(rates, dtype=float)
    return HazardCurve(np.arange(rates.size, dtype=float), rates, float(rates.size))


def hazard_from_life_table(lt: LifeTable, source=HazardSource.MX_DIRECT) -> HazardCurve:
    """Step hazard on ``[0, open_age)``; the open-ended row is excluded.

    ``MX_DIRECT`` uses the central death rate; ``QX_IMPLIED`` uses
    ``-log(1 - qx)``, the rate that is constant within the year and kills the
    same fraction.
    """
    source = HazardSource(source)
    closed = lt.rows[:-1]
    if source is HazardSource.MX_DIRECT:
        rates = np.array([r.mx for r in closed], dtype=float)
    else:
        qx = np.array([r.qx for r in closed], dtype=float)
        if np.any(qx >= 1):
            age = closed[int(np.argmax(qx >= 1))].age_start
            raise UnitProbability(f"qx = 1 at age {age} in {lt.year}; implied hazard is infinite")
        rates = -np.log1p(-qx) + 0.0
    return hazard_from_rates(rates)


def hazard_from_mx_series(series: MortalityRateSeries, sex=Sex.TOTAL) -> HazardCurve:
    return hazard_from_rates(series.for_sex(sex)[:-1])


def survival_from_life_table(lt: LifeTable) -> SurvivalCurve:
    """``lx / l0`` at ages ``0 .. open_age``.

    Trailing ages with ``lx == 0`` are dropped, with a :class:`SurvivalTruncated`
    warning naming the last age kept.
    """
    lx = lt.lx
    if lx[0] <= 0:
        raise ZeroRadix(f"radix lx at age 0 is {lx[0]:g} in {lt.year}")
    positive = np.nonzero(lx > 0)[0]
    keep = int(positive[-1]) + 1
    if keep < lx.size:
        warnings.warn(
            f"{lt.year}: survivors reach 0 after age {lt.rows[keep - 1].age_start}; "
            f"curve truncated there",
            SurvivalTruncated,
            stacklevel=2,
        )
    return SurvivalCurve(lt.ages[:keep].astype(float), lx[:keep] / lx[0])


def median_age_at_death(lt: LifeTable) -> float:
    """Age at which ``lx`` falls to half the radix, interpolated linearly."""
    lx = lt.lx
    if lx[0] <= 0:
        raise ZeroRadix(f"radix lx at age 0 is {lx[0]:g} in {lt.year}")
    ratio = lx / lx[0]
    below = np.nonzero(ratio <= 0.5)[0]
    if below.size == 0:
        raise MedianNotReached(
            f"{lt.year}: {ratio[-1]:.4g} of the radix still alive at age {lt.open_age}"
        )
    i = int(below[0])
    ages = lt.ages.astype(float)
    if ratio[i] == 0.5:
        return float(ages[i])
    return float(ages[i - 1] + (ratio[i - 1] - 0.5) / (ratio[i - 1] - ratio[i]) * (ages[i] - ages[i - 1]))


def gti_at_cutoffs(h: HazardCurve, cutoffs: Iterable[float], epsilon=DEFAULT_EPSILON) -> list[GtiResult]:
    H = cumulative_hazard(h)
    results = []
    for T in sorted(float(c) for c in cutoffs):
        if T > H.domain_end:
            raise CutoffOutOfDomain(T, H.domain_end)
        results.append(gti(H, T, epsilon))
    return results


def gti_from_life_table(
    lt: LifeTable,
    cutoffs: Iterable[float],
    source=HazardSource.MX_DIRECT,
    epsilon=DEFAULT_EPSILON,
) -> list[GtiResult]:
    """Index, survival and effective hazard at each cut-off, ascending."""
    return gti_at_cutoffs(hazard_from_life_table(lt, source), cutoffs, epsilon)
