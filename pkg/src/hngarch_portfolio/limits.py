"""Period-length scaling, Merton/Heston baseline schedules and convergence studies.

Daily parameters are rescaled to a period of ``delta`` days with::

    alpha_h = alpha * delta**2        theta_h = theta / delta
    lam_h   = lam                     r_h     = r * delta
    beta_h  = 1 - (1 - persistence) * delta - alpha * theta**2
    omega_h = omega * delta**2

``alpha_h * theta_h**2`` is scale free, persistence interpolates linearly in
``delta`` and the per-period long-run variance is ``delta * h_bar``. The
continuous-time Heston allocation is obtained as the fine-grid limit of the
optimal recursion itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .errors import InadmissibleCoefficient, InvalidDelta
from .model import GarchParams, long_run_variance, validate
from .recursion import Preferences, StrategySchedule

__all__ = [
    "SCALING_CONVENTION",
    "DEFAULT_DELTAS",
    "HESTON_DELTA_REF",
    "DeltaScaling",
    "ConvergenceRow",
    "MomentResiduals",
    "scale_params",
    "merton_weight",
    "merton_schedule",
    "heston_schedule",
    "convergence_sweep",
    "limit_moment_check",
]

SCALING_CONVENTION = "linear-persistence: beta_h=1-(1-beta-alpha*theta^2)*delta-alpha*theta^2, omega_h=omega*delta^2"
DEFAULT_DELTAS = tuple(2.0**-k for k in range(11))
HESTON_DELTA_REF = 2.0**-10


@dataclass(frozen=True)
class DeltaScaling:
    """Parameters for a period of ``delta`` days plus the implied diffusion limit."""

    delta: float
    base: GarchParams
    scaled: GarchParams
    convention: str = SCALING_CONVENTION

    @property
    def heston_limit(self) -> dict[str, float]:
        """Heston (rho = -1) coefficients per day reached as ``delta -> 0``."""
        b = self.base
        return {
            "kappa": 1.0 - b.persistence,
            "theta_v": long_run_variance(b),
            "sigma": 2.0 * b.alpha * b.theta,
            "rho": -math.copysign(1.0, b.theta) if b.theta else 0.0,
            "lambda_bar": b.lam + 0.5,
            "r": b.r,
        }


def scale_params(params: GarchParams, delta: float) -> DeltaScaling:
    """Rescale daily parameters to periods of ``delta`` days (``0 < delta <= 1``)."""
    validate(params)
    if not 0.0 < delta <= 1.0:
        raise InvalidDelta(delta)
    if delta == 1.0:
        return DeltaScaling(delta=1.0, base=params, scaled=params)
    a_theta2 = params.alpha * params.theta**2
    scaled = GarchParams(
        omega=params.omega * delta**2,
        beta=1.0 - (1.0 - params.persistence) * delta - a_theta2,
        alpha=params.alpha * delta**2,
        theta=params.theta / delta,
        lam=params.lam,
        r=params.r * delta,
    )
    return DeltaScaling(delta=delta, base=params, scaled=validate(scaled))


def merton_weight(params: GarchParams, gamma: float) -> float:
    """Constant Merton weight ``(lam + 1/2) / (1 - gamma)``."""
    return (params.lam + 0.5) / (1.0 - gamma)


def merton_schedule(params: GarchParams, prefs: Preferences) -> StrategySchedule:
    return StrategySchedule(
        np.full(prefs.T, merton_weight(params, prefs.gamma)), label="merton"
    )


def _steps_per_day(delta: float) -> int:
    steps = round(1.0 / delta)
    if abs(steps * delta - 1.0) > 1e-12:
        raise InvalidDelta(delta)
    return steps


def _optimal_pi(scaled: GarchParams, gamma: float, n: int) -> np.ndarray:
    _, _, pi, bad_t, bad_value = _kernels.optimal_backward(
        scaled.alpha, scaled.beta, scaled.theta, scaled.omega,
        scaled.lam, scaled.r, float(gamma), n,
    )
    if bad_t >= 0:
        raise InadmissibleCoefficient(int(bad_t), float(bad_value))
    return pi


def heston_schedule(
    params: GarchParams,
    prefs: Preferences,
    horizon_days: Optional[int] = None,
    delta_ref: float = HESTON_DELTA_REF,
) -> StrategySchedule:
    """Continuous-rebalancing allocation sampled at the start of each day.

    Solves the optimal recursion on a grid of ``delta_ref`` days and keeps
    every ``1/delta_ref``-th weight.
    """
    horizon = prefs.T if horizon_days is None else int(horizon_days)
    steps = _steps_per_day(delta_ref)
    scaled = scale_params(params, delta_ref).scaled
    pi_fine = _optimal_pi(scaled, prefs.gamma, horizon * steps)
    return StrategySchedule(
        pi_fine[::steps].copy(),
        label="heston",
        meta={"delta_ref": delta_ref, "convention": SCALING_CONVENTION},
    )


@dataclass(frozen=True)
class ConvergenceRow:
    delta: float
    n_periods: int
    pi_0: float
    pi_heston: float

    @property
    def gap(self) -> float:
        return self.pi_0 - self.pi_heston


def convergence_sweep(
    params: GarchParams,
    prefs: Preferences,
    horizon_days: float,
    deltas: Sequence[float] = DEFAULT_DELTAS,
    delta_ref: float = HESTON_DELTA_REF,
) -> list[ConvergenceRow]:
    """Initial optimal weight for each period length, against the Heston baseline.

    ``horizon_days / delta`` must be a whole number of periods.
    """
    validate(params)
    steps_ref = _steps_per_day(delta_ref)
    n_ref = round(horizon_days * steps_ref)
    if abs(n_ref - horizon_days * steps_ref) > 1e-9 or n_ref < 1:
        raise ValueError("horizon must be a whole number of reference periods")
    pi_heston = float(_optimal_pi(scale_params(params, delta_ref).scaled, prefs.gamma, n_ref)[0])
    rows = []
    for delta in deltas:
        n = round(horizon_days / delta)
        if n < 1 or abs(n * delta - horizon_days) > 1e-9 * max(1.0, horizon_days):
            raise ValueError(f"horizon {horizon_days} is not a multiple of delta={delta}")
        scaled = scale_params(params, delta).scaled
        pi0 = float(_optimal_pi(scaled, prefs.gamma, n)[0])
        rows.append(ConvergenceRow(delta=float(delta), n_periods=int(n), pi_0=pi0, pi_heston=pi_heston))
    return rows


@dataclass(frozen=True)
class MomentResiduals:
    """Per-unit-time discrete conditional moments and their distance to the diffusion limit.

    Discrete moments come from Gauss-Hermite quadrature of the one-period
    transition, not from the closed forms they are compared against.
    """

    delta: float
    discrete: dict = field(default_factory=dict)
    limit: dict = field(default_factory=dict)

    @property
    def residuals(self) -> dict[str, float]:
        return {k: self.discrete[k] - self.limit[k] for k in self.limit}


def limit_moment_check(
    params: GarchParams, delta: float, pi: float, v: float, nodes: int = 60
) -> MomentResiduals:
    """Compare one-period moments of (log-wealth, variance) with the Heston diffusion.

    ``v`` is the variance rate per day, so the period variance is ``v * delta``.
    """
    sc = scale_params(params, delta)
    p = sc.scaled
    x, wts = np.polynomial.hermite_e.hermegauss(nodes)
    wts = wts / wts.sum()
    h = v * delta
    dw = p.r + pi * p.lam * h + 0.5 * (pi - pi * pi) * h + pi * math.sqrt(h) * x
    h_next = p.omega + p.beta * h + p.alpha * (x - p.theta * math.sqrt(h)) ** 2
    dv = h_next / delta - v

    def expect(f):
        return float(wts @ f)

    m_w, m_v = expect(dw), expect(dv)
    var_w = expect((dw - m_w) ** 2)
    var_v = expect((dv - m_v) ** 2)
    cov = expect((dw - m_w) * (dv - m_v))
    discrete = {
        "mean": m_w / delta,
        "variance": var_w / delta,
        "covariance": cov / delta,
        "variance_drift": m_v / delta,
        "variance_variance": var_v / delta,
        "correlation": cov / math.sqrt(var_w * var_v),
    }
    lim = sc.heston_limit
    limit = {
        "mean": params.r + pi * params.lam * v + 0.5 * (pi - pi * pi) * v,
        "variance": pi * pi * v,
        "covariance": -2.0 * params.alpha * params.theta * pi * v,
        "variance_drift": lim["kappa"] * (lim["theta_v"] - v),
        "variance_variance": lim["sigma"] ** 2 * v,
        "correlation": -math.copysign(1.0, params.theta * pi),
    }
    return MomentResiduals(delta=delta, discrete=discrete, limit=limit)
