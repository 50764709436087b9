"""Hazard, cumulative-hazard and survival curves, and the Gini-type index.

The data model is the life-table one: the rate of mortality is constant on
each age interval, so the cumulative hazard is piecewise linear and its
integral over ``[0, T]`` is a sum of trapezoids with no quadrature error.

All curves are immutable; their arrays are read-only copies of the inputs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CutoffOutOfDomain,
    DegenerateInterval,
    InvalidCurve,
    MedianNotReached,
    NonpositiveCutoff,
    ZeroSurvival,
)

DEFAULT_EPSILON = 1e-3


class Classification(str, enum.Enum):
    AGEING = "Ageing"
    REJUVENATING = "Rejuvenating"
    NON_AGEING = "NonAgeing"

    def __str__(self):
        return self.value


def _frozen_array(values, name):
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise InvalidCurve(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise InvalidCurve(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


def _check_knots(knots):
    if knots.size == 0:
        raise InvalidCurve("at least one knot is required")
    if knots[0] != 0.0:
        raise InvalidCurve(f"knots must start at age 0, got {knots[0]:g}")
    if np.any(np.diff(knots) <= 0):
        raise InvalidCurve("knots must be strictly increasing")


@dataclass(frozen=True, eq=False)
class HazardCurve:
    """Piecewise-constant rate of mortality.

    ``rates[i]`` applies on ``[knots[i], knots[i+1])``, with the last interval
    closed off by ``domain_end``.
    """

    knots: np.ndarray
    rates: np.ndarray
    domain_end: float

    def __post_init__(self):
        knots = _frozen_array(self.knots, "knots")
        rates = _frozen_array(self.rates, "rates")
        _check_knots(knots)
        if rates.size != knots.size:
            raise InvalidCurve(
                f"need one rate per interval: {knots.size} knots, {rates.size} rates"
            )
        if np.any(rates < 0):
            raise InvalidCurve("rates must be nonnegative")
        domain_end = float(self.domain_end)
        if not math.isfinite(domain_end) or domain_end <= knots[-1]:
            raise InvalidCurve(
                f"domain_end={domain_end:g} must exceed the last knot {knots[-1]:g}"
            )
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "domain_end", domain_end)

    @property
    def edges(self):
        """All interval boundaries, ``domain_end`` included."""
        return np.append(self.knots, self.domain_end)

    def __call__(self, t):
        idx = np.searchsorted(self.knots, t, side="right") - 1
        return self.rates[np.clip(idx, 0, self.rates.size - 1)]


@dataclass(frozen=True, eq=False)
class CumulativeHazardCurve:
    """Piecewise-linear cumulative hazard with ``H(0) = 0``."""

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        knots = _frozen_array(self.knots, "knots")
        values = _frozen_array(self.values, "values")
        _check_knots(knots)
        if values.size != knots.size:
            raise InvalidCurve("knots and values differ in length")
        if values[0] != 0.0:
            raise InvalidCurve(f"H(0) must be 0, got {values[0]:g}")
        if np.any(np.diff(values) < 0):
            raise InvalidCurve("cumulative hazard must be nondecreasing")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)

    @property
    def domain_end(self):
        return float(self.knots[-1])

    def __call__(self, t):
        return np.interp(t, self.knots, self.values)


@dataclass(frozen=True, eq=False)
class SurvivalCurve:
    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        knots = _frozen_array(self.knots, "knots")
        values = _frozen_array(self.values, "values")
        _check_knots(knots)
        if values.size != knots.size:
            raise InvalidCurve("knots and values differ in length")
        if values[0] != 1.0:
            raise InvalidCurve(f"S(0) must be 1, got {values[0]:g}")
        if np.any(values < 0) or np.any(values > 1):
            raise InvalidCurve("survival values must lie in [0, 1]")
        if np.any(np.diff(values) > 0):
            raise InvalidCurve("survival must be nonincreasing")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        return np.interp(t, self.knots, self.values)


@dataclass(frozen=True)
class GtiResult:
    """Index value and companions at one cut-off age.

    ``survival_at_T`` is ``exp(-H(T))`` and ``h_eff`` is ``H(T)/T``. The
    survival underflows to 0 once ``H(T)`` exceeds roughly 745.
    """

    cutoff_T: float
    gti: float
    survival_at_T: float
    h_eff: float
    classification: Classification


def cumulative_hazard(h: HazardCurve) -> CumulativeHazardCurve:
    edges = h.edges
    increments = h.rates * np.diff(edges)
    values = np.concatenate(([0.0], np.cumsum(increments)))
    return CumulativeHazardCurve(edges, values)


def survival_from_cumulative_hazard(H: CumulativeHazardCurve) -> SurvivalCurve:
    return SurvivalCurve(H.knots, np.exp(-H.values))


def cumulative_hazard_from_survival(S: SurvivalCurve) -> CumulativeHazardCurve:
    """Invert ``S = exp(-H)``.

    Raises :class:`ZeroSurvival` if any value is 0; truncate the curve first.
    """
    if np.any(S.values <= 0):
        age = S.knots[np.argmax(S.values <= 0)]
        raise ZeroSurvival(f"survival reaches 0 at age {age:g}; cumulative hazard is infinite")
    # + 0.0 turns -0.0 (from log 1) into 0.0
    return CumulativeHazardCurve(S.knots, -np.log(S.values) + 0.0)


def effective_hazard(survival_at_T: float, T: float) -> float:
    """Rate of the exponential lifetime with the same survival at ``T``."""
    if T <= 0:
        raise NonpositiveCutoff(f"cutoff must be positive, got {T:g}")
    if survival_at_T <= 0:
        raise ZeroSurvival("survival at the cutoff is 0")
    if survival_at_T > 1:
        raise InvalidCurve(f"survival probability must be in (0, 1], got {survival_at_T:g}")
    return -math.log(survival_at_T) / T + 0.0


def _truncate(H: CumulativeHazardCurve, T: float):
    """Knots and values of H restricted to ``[0, T]``, T appended if needed."""
    if T <= 0:
        raise NonpositiveCutoff(f"cutoff must be positive, got {T:g}")
    if T > H.domain_end:
        raise CutoffOutOfDomain(T, H.domain_end)
    n = np.searchsorted(H.knots, T, side="left")
    knots = H.knots[:n]
    values = H.values[:n]
    if n < H.knots.size and H.knots[n] == T:
        return np.append(knots, T), np.append(values, H.values[n])
    return np.append(knots, T), np.append(values, float(H(T)))


def _trapezoid(t, v):
    return float(np.sum(np.diff(t) * (v[:-1] + v[1:])) / 2.0)


def integrate_cumulative_hazard(H: CumulativeHazardCurve, T: float) -> float:
    """Exact integral of the piecewise-linear H over ``[0, T]``."""
    return _trapezoid(*_truncate(H, T))


def classify(gti_value: float, epsilon: float = DEFAULT_EPSILON) -> Classification:
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if gti_value > epsilon:
        return Classification.AGEING
    if gti_value < -epsilon:
        return Classification.REJUVENATING
    return Classification.NON_AGEING


def gti(H: CumulativeHazardCurve, T: float, epsilon: float = DEFAULT_EPSILON) -> GtiResult:
    """Gini-type ageing index of the lifetime described by ``H`` on ``[0, T]``.

    Compares the area under H with the area under the chord from the origin
    to ``(T, H(T))``, which is the cumulative hazard of the exponential
    lifetime sharing the survival probability at ``T``. Positive values mean
    an increasing mortality rate, negative a decreasing one.

    Raises
    ------
    NonpositiveCutoff
        ``T <= 0``.
    CutoffOutOfDomain
        ``T`` beyond the last knot of ``H``.
    DegenerateInterval
        ``H(T) == 0``: no mortality before ``T`` and the index is 0/0.
    """
    t, v = _truncate(H, T)
    H_T = float(v[-1])
    if H_T <= 0:
        raise DegenerateInterval(f"H({T:g}) = 0; the index is undefined without mortality")
    area = _trapezoid(t, v)
    value = 1.0 - 2.0 * area / (T * H_T)
    return GtiResult(
        cutoff_T=float(T),
        gti=value,
        survival_at_T=math.exp(-H_T),
        h_eff=H_T / T,
        classification=classify(value, epsilon),
    )


def chord_areas(H: CumulativeHazardCurve, T: float) -> tuple[float, float]:
    """Areas ``(A, A + B)``: under H, and under the chord to ``(T, H(T))``.

    The index equals ``1 - A / (A + B)``.
    """
    t, v = _truncate(H, T)
    return _trapezoid(t, v), 0.5 * T * float(v[-1])


def median_from_survival(S: SurvivalCurve) -> float:
    """First age at which the linearly interpolated survival reaches 1/2."""
    below = np.nonzero(S.values <= 0.5)[0]
    if below.size == 0:
        raise MedianNotReached(
            f"survival is still {S.values[-1]:.4g} at age {S.knots[-1]:g}"
        )
    i = int(below[0])
    if S.values[i] == 0.5:
        return float(S.knots[i])
    t0, t1 = S.knots[i - 1], S.knots[i]
    s0, s1 = S.values[i - 1], S.values[i]
    return float(t0 + (s0 - 0.5) / (s0 - s1) * (t1 - t0))
