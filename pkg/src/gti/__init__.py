"""Gini-type index of ageing and rejuvenating lifetimes."""

__version__ = "0.1.0"

from .core import (
    Classification,
    CumulativeHazardCurve,
    GtiResult,
    HazardCurve,
    SurvivalCurve,
    chord_areas,
    classify,
    cumulative_hazard,
    cumulative_hazard_from_survival,
    effective_hazard,
    gti,
    integrate_cumulative_hazard,
    median_from_survival,
    survival_from_cumulative_hazard,
)
from .hmd import (
    HazardSource,
    LifeTable,
    MortalityRateSeries,
    Sex,
    gti_from_life_table,
    hazard_from_life_table,
    median_age_at_death,
    parse_hmd_life_table,
    parse_hmd_mx,
    survival_from_life_table,
)
from .parametric import (
    WeibullParams,
    discretize_hazard,
    weibull_cumulative_hazard_at,
    weibull_gti_closed,
    weibull_hazard_at,
)
