"""Weibull lifetimes in closed form.

Used as analytic oracles for the numerical index and to tabulate the index
against the shape parameter. The exponential lifetime is the ``shape=1`` case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import HazardCurve
from .errors import DomainError, NonpositiveShape, SingularOrigin

# (t/eta)**shape overflows long before these bounds matter demographically
SHAPE_MIN = 1e-6
SHAPE_MAX = 1e6


@dataclass(frozen=True)
class WeibullParams:
    shape_beta: float
    scale_eta: float = 1.0

    def __post_init__(self):
        beta, eta = float(self.shape_beta), float(self.scale_eta)
        if not math.isfinite(beta) or beta <= 0:
            raise NonpositiveShape(f"shape must be positive and finite, got {beta:g}")
        if not SHAPE_MIN < beta < SHAPE_MAX:
            raise DomainError(f"shape {beta:g} outside ({SHAPE_MIN:g}, {SHAPE_MAX:g})")
        if not math.isfinite(eta) or eta <= 0:
            raise DomainError(f"scale must be positive and finite, got {eta:g}")
        object.__setattr__(self, "shape_beta", beta)
        object.__setattr__(self, "scale_eta", eta)


def weibull_hazard_at(p: WeibullParams, t: float) -> float:
    """``(beta/eta) * (t/eta)**(beta-1)``; diverges at 0 when ``beta < 1``."""
    if t < 0:
        raise DomainError(f"age must be nonnegative, got {t:g}")
    beta, eta = p.shape_beta, p.scale_eta
    if t == 0:
        if beta < 1:
            raise SingularOrigin(f"hazard diverges at t=0 for shape {beta:g} < 1")
        return 1.0 / eta if beta == 1 else 0.0
    return beta / eta * (t / eta) ** (beta - 1)


def weibull_cumulative_hazard_at(p: WeibullParams, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("age must be nonnegative")
    out = (t / p.scale_eta) ** p.shape_beta
    return float(out) if out.ndim == 0 else out


def weibull_survival_at(p: WeibullParams, t):
    return np.exp(-weibull_cumulative_hazard_at(p, t))


def weibull_gti_closed(shape_beta: float) -> float:
    """Index of a Weibull lifetime, ``1 - 2/(beta + 1)``.

    Independent of the scale and of the cut-off age.
    """
    if not shape_beta > 0:
        raise NonpositiveShape(f"shape must be positive, got {shape_beta!r}")
    return 1.0 - 2.0 / (shape_beta + 1.0)


def discretize_hazard(p: WeibullParams, domain_end: float, n_steps: int) -> HazardCurve:
    """Uniform step approximation whose step integrals are exact.

    Each rate is the analytic cumulative-hazard increment over its step divided
    by the step width, so the integrated curve matches ``(t/eta)**beta`` at
    every knot and only the piecewise-linear interpolation between knots
    carries discretization error.
    """
    if n_steps < 1:
        raise DomainError(f"n_steps must be at least 1, got {n_steps}")
    if not domain_end > 0:
        raise DomainError(f"domain_end must be positive, got {domain_end!r}")
    edges = np.linspace(0.0, domain_end, n_steps + 1)
    H = weibull_cumulative_hazard_at(p, edges)
    rates = np.diff(H) / np.diff(edges)
    return HazardCurve(edges[:-1], rates, domain_end)
