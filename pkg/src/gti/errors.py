"""Exception hierarchy.

Two families matter to callers: :class:`ParseError` (bad input text, always
carrying a line number when one is known) and :class:`DomainError` (valid
input that the requested computation cannot handle).
"""


class GtiError(Exception):
    pass


class DomainError(GtiError, ValueError):
    pass


class InvalidCurve(DomainError):
    pass


class ZeroSurvival(DomainError):
    pass


class NonpositiveCutoff(DomainError):
    pass


class DegenerateInterval(DomainError):
    pass


class CutoffOutOfDomain(DomainError):
    def __init__(self, cutoff, domain_end):
        self.cutoff = cutoff
        self.domain_end = domain_end
        super().__init__(
            f"cutoff T={cutoff:g} lies outside the curve domain [0, {domain_end:g}]"
        )


class SingularOrigin(DomainError):
    pass


class NonpositiveShape(DomainError):
    pass


class UnitProbability(DomainError):
    pass


class ZeroRadix(DomainError):
    pass


class MedianNotReached(DomainError):
    pass


class ParseError(GtiError, ValueError):
    """Input text could not be turned into a table.

    ``line_no`` is 1-based; ``None`` when the problem is not tied to one line.
    """

    def __init__(self, message, line_no=None):
        self.line_no = line_no
        self.message = message
        where = f"line {line_no}: " if line_no is not None else ""
        super().__init__(where + message)


class MalformedHeader(ParseError):
    pass


class MalformedRow(ParseError):
    pass


class MissingDatum(ParseError):
    pass


class NonContiguousAges(ParseError):
    def __init__(self, year, message, line_no=None):
        self.year = year
        super().__init__(f"year {year}: {message}", line_no)


class NonMonotoneLx(ParseError):
    def __init__(self, year, message, line_no=None):
        self.year = year
        super().__init__(f"year {year}: {message}", line_no)


class YearNotFound(ParseError):
    def __init__(self, year, available):
        self.year = year
        self.available = tuple(available)
        if not available:
            span = "none"
        elif len(available) <= 5:
            span = ", ".join(str(y) for y in available)
        else:
            span = f"{min(available)}-{max(available)}"
        super().__init__(f"year {year} not present (available: {span})")
