"""Heston-Nandi GARCH(1,1) model definition and analytic variance moments.

The log-price and conditional variance evolve per period as::

    X_t = X_{t-1} + r + lam * h_t + sqrt(h_t) * z_t
    h_{t+1} = omega + beta * h_t + alpha * (z_t - theta * sqrt(h_t))**2

with ``z_t`` i.i.d. standard normal. All rates and variances are per period.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NegativeCoefficient, NonStationary, ValidationError

__all__ = [
    "GarchParams",
    "CHRISTOFFERSEN",
    "validate",
    "long_run_variance",
    "expected_variance",
    "variance_log_price_covariance",
    "next_variance",
]


@dataclass(frozen=True)
class GarchParams:
    """HN-GARCH coefficients plus the per-period risk-free rate.

    Parameters
    ----------
    omega : variance intercept
    beta : variance persistence
    alpha : shock loading
    theta : asymmetry (leverage) coefficient
    lam : risk premium per unit of variance
    r : continuously compounded per-period risk-free rate
    """

    omega: float
    beta: float
    alpha: float
    theta: float
    lam: float
    r: float = 0.0

    @property
    def persistence(self) -> float:
        return self.beta + self.alpha * self.theta**2

    def with_(self, **changes) -> "GarchParams":
        return replace(self, **changes)

    def as_dict(self) -> dict[str, float]:
        return {
            "omega": self.omega,
            "beta": self.beta,
            "alpha": self.alpha,
            "theta": self.theta,
            "lam": self.lam,
            "r": self.r,
        }


#: Daily S&P 500 estimates of Christoffersen, Heston and Jacobs (2006),
#: with a 1% p.a. risk-free rate.
CHRISTOFFERSEN = GarchParams(
    omega=3.038e-9, beta=0.9026, alpha=3.660e-6, theta=128.4, lam=2.772, r=0.01 / 252
)


def validate(params: GarchParams) -> GarchParams:
    """Check nonnegativity and strict stationarity; return ``params`` unchanged.

    Raises
    ------
    NegativeCoefficient
        If any of ``omega``, ``alpha``, ``beta`` is negative.
    NonStationary
        If ``beta + alpha * theta**2 >= 1``.
    """
    for name in ("omega", "alpha", "beta"):
        value = getattr(params, name)
        if value < 0:
            raise NegativeCoefficient(name, value)
    for name, value in params.as_dict().items():
        if not np.isfinite(value):
            raise ValidationError(f"{name} must be finite, got {value!r}")
    p = params.persistence
    if not p < 1.0:
        raise NonStationary(p)
    return params


def long_run_variance(params: GarchParams) -> float:
    """Stationary mean of the conditional variance, ``(alpha + omega) / (1 - persistence)``."""
    validate(params)
    return (params.alpha + params.omega) / (1.0 - params.persistence)


def expected_variance(params: GarchParams, h0: float, t: int) -> float:
    """Expected variance ``t`` steps ahead of a known variance ``h0``.

    Closed form of the recursion ``E[h_t] = alpha + omega + persistence * E[h_{t-1}]``.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    p = params.persistence
    pt = p**t
    if p == 1.0:
        geometric = float(t)
    else:
        geometric = (1.0 - pt) / (1.0 - p)
    return (params.alpha + params.omega) * geometric + pt * h0


def variance_log_price_covariance(params: GarchParams, h: float) -> float:
    """Conditional covariance of next-period variance with the current log-price move."""
    return -2.0 * params.alpha * params.theta * h


def next_variance(params: GarchParams, h, z):
    """One step of the variance recursion; vectorises over ``h`` and ``z``."""
    return params.omega + params.beta * h + params.alpha * (z - params.theta * np.sqrt(h)) ** 2
