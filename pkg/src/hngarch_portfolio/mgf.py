"""Moment generating function of terminal log-wealth under a deterministic schedule.

For any admissible schedule the log-wealth is itself an affine GARCH process,
so ``E_t[exp(u W_T)] = exp(u w + A[t] + B[t] h_{t+1})`` with ``A, B`` from a
backward recursion in ``u``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import MgfDivergent
from .model import GarchParams, expected_variance, validate
from .recursion import Preferences, ScheduleLike, StrategySchedule, as_schedule

__all__ = [
    "MgfCoefficients",
    "Cumulants",
    "mgf_coefficients",
    "mgf_value",
    "log_mgf",
    "expected_log_wealth",
    "cumulants_from_mgf",
    "central_difference_weights",
]


@dataclass(frozen=True)
class MgfCoefficients:
    u: float
    A: np.ndarray
    B: np.ndarray
    schedule: StrategySchedule
    first_violation: Optional[int] = None

    @property
    def T(self) -> int:
        return self.A.size - 1

    @property
    def divergent(self) -> bool:
        return self.first_violation is not None


def mgf_coefficients(
    params: GarchParams,
    prefs: Preferences,
    schedule: ScheduleLike,
    u: float,
    *,
    strict: bool = True,
) -> MgfCoefficients:
    """Backward recursion for ``A[t], B[t]`` at transform argument ``u``.

    Raises
    ------
    MgfDivergent
        If ``1 - 2*alpha*B[t+1] <= 0`` at some step (only when ``strict``).
    """
    validate(params)
    schedule = as_schedule(schedule, prefs.T)
    T = prefs.T
    alpha, theta, omega, r = params.alpha, params.theta, params.omega, params.r
    persistence = params.persistence
    lb = params.lam + 0.5
    u = float(u)
    A = np.zeros(T + 1)
    B = np.zeros(T + 1)
    first = None
    for t in range(T - 1, -1, -1):
        b = B[t + 1]
        denom = 1.0 - 2.0 * alpha * b
        if not denom > 0:
            if strict:
                raise MgfDivergent(u, t, denom)
            first = t
            A[: t + 1] = np.nan
            B[: t + 1] = np.nan
            break
        p = schedule.pi[t]
        A[t] = A[t + 1] + u * r + b * omega - 0.5 * math.log(denom)
        B[t] = (
            u * (lb * p - 0.5 * p * p)
            + persistence * b
            + (u * p - 2.0 * alpha * theta * b) ** 2 / (2.0 * denom)
        )
    for arr in (A, B):
        arr.setflags(write=False)
    return MgfCoefficients(u=u, A=A, B=B, schedule=schedule, first_violation=first)


def mgf_value(coeffs: MgfCoefficients, t: int, w: float, h_next: float) -> float:
    """``E_t[exp(u W_T)]`` given ``W_t = w`` and ``h_{t+1} = h_next``."""
    return math.exp(coeffs.u * w + coeffs.A[t] + coeffs.B[t] * h_next)


def log_mgf(params, prefs, schedule, u, w, h_next, t: int = 0) -> float:
    """Cumulant generating function ``log E_t[exp(u W_T)]``."""
    c = mgf_coefficients(params, prefs, schedule, u)
    return u * w + c.A[t] + c.B[t] * h_next


def expected_log_wealth(
    params: GarchParams, prefs: Preferences, schedule: ScheduleLike, h1: float, t: int
) -> float:
    """``E_0[W_t]`` in closed form.

    ``h1`` is the variance of the first period, known at time 0, so the
    drift of period ``j`` (``0 <= j < t``) is weighted by the ``j``-step
    variance forecast.
    """
    schedule = as_schedule(schedule, prefs.T)
    if not 0 <= t <= prefs.T:
        raise IndexError(f"t={t} outside [0, {prefs.T}]")
    lb = params.lam + 0.5
    total = prefs.w0 + params.r * t
    for j in range(t):
        p = schedule.pi[j]
        total += (lb * p - 0.5 * p * p) * expected_variance(params, h1, j)
    return total


def central_difference_weights(npoints: int, order: int) -> np.ndarray:
    """Weights of the central ``npoints`` stencil for the ``order``-th derivative (unit step)."""
    if npoints % 2 == 0 or npoints <= order:
        raise ValueError("need an odd number of points larger than the order")
    half = npoints // 2
    nodes = np.arange(-half, half + 1, dtype=float)
    vander = np.vander(nodes, increasing=True).T
    rhs = np.zeros(npoints)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(vander, rhs)


@dataclass(frozen=True)
class Cumulants:
    """First four cumulants of ``W_T`` and the derived shape statistics."""

    kappa: np.ndarray
    step: float

    @property
    def mean(self) -> float:
        return float(self.kappa[0])

    @property
    def variance(self) -> float:
        return float(self.kappa[1])

    @property
    def skewness(self) -> float:
        if self.kappa.size < 3 or not self.kappa[1] > 0:
            return float("nan")
        return float(self.kappa[2] / self.kappa[1] ** 1.5)

    @property
    def excess_kurtosis(self) -> float:
        if self.kappa.size < 4 or not self.kappa[1] > 0:
            return float("nan")
        return float(self.kappa[3] / self.kappa[1] ** 2)


def cumulants_from_mgf(
    params: GarchParams,
    prefs: Preferences,
    schedule: ScheduleLike,
    w: float,
    h_next: float,
    order: int = 4,
    *,
    t: int = 0,
    npoints: int = 7,
    scaled_step: float = 0.05,
    step: Optional[float] = None,
) -> Cumulants:
    """Cumulants of ``W_T`` given ``W_t = w`` by central differences of ``log E_t[exp(u W_T)]``.

    The exactly linear ``u * w`` term is removed before differencing. Unless
    ``step`` is given, the step is ``scaled_step`` divided by a pilot estimate
    of the standard deviation of ``W_T``, which keeps the higher-order
    differences clear of round-off.
    """
    if not 1 <= order <= 4:
        raise ValueError("order must be in 1..4")
    schedule = as_schedule(schedule, prefs.T)

    def k(u):
        c = mgf_coefficients(params, prefs, schedule, u)
        return c.A[t] + c.B[t] * h_next

    if not np.any(schedule.pi[t:]):
        # No risky exposure left: W_T = w + r * (T - t) exactly.
        kappa = np.zeros(order)
        kappa[0] = w + k(1.0)
        return Cumulants(kappa=kappa, step=float("nan"))

    if step is None:
        pilot = 1e-3
        var0 = (k(pilot) - 2.0 * k(0.0) + k(-pilot)) / pilot**2
        step = scaled_step / math.sqrt(var0)

    half = npoints // 2
    values = np.array([k(j * step) for j in range(-half, half + 1)])
    kappa = np.empty(order)
    for n in range(1, order + 1):
        kappa[n - 1] = central_difference_weights(npoints, n) @ values / step**n
    kappa[0] += w
    return Cumulants(kappa=kappa, step=step)
