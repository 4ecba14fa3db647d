"""Backward Bellman recursions for the CRRA investor under HN-GARCH.

The value function is exponential-affine in log-wealth ``w`` and next-period
variance ``h``::

    Phi_t(w, h) = exp(D[t] + gamma * w + E[t] * h) / gamma

with ``D[T] = E[T] = 0``. :func:`solve_optimal` runs the maximising
recursion; :func:`evaluate_suboptimal` runs the same recursion for a fixed
allocation schedule.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import _kernels
from .errors import InadmissibleCoefficient, MismatchedHorizon, ValidationError
from .model import GarchParams, validate

__all__ = [
    "Preferences",
    "StrategySchedule",
    "CoefficientTable",
    "WelReport",
    "ConjecturedOptimalityWarning",
    "as_schedule",
    "solve_optimal",
    "decompose",
    "evaluate_suboptimal",
    "value_at",
    "wealth_equivalent_loss",
    "check_monotone_E",
    "expected_utility",
]

COEF_ATOL = 1e-12


class ConjecturedOptimalityWarning(UserWarning):
    """Optimality of the closed form is only proven for ``gamma < 0``."""


@dataclass(frozen=True)
class Preferences:
    """CRRA preferences ``U(v) = v**gamma / gamma`` over a horizon of ``T`` periods.

    ``w0`` is the initial log-wealth.
    """

    gamma: float
    T: int
    w0: float = 0.0

    def __post_init__(self):
        if not (self.gamma != 0 and self.gamma < 1) or not math.isfinite(self.gamma):
            raise ValidationError("gamma must be nonzero and below 1")
        if int(self.T) != self.T or self.T < 1:
            raise ValidationError(f"horizon T must be a positive integer, got {self.T!r}")
        object.__setattr__(self, "T", int(self.T))

    @property
    def regime(self) -> str:
        return "proved-optimal" if self.gamma < 0 else "conjectured-optimal"


@dataclass(frozen=True)
class StrategySchedule:
    """Deterministic per-period risky weights ``pi[0], ..., pi[T-1]``."""

    pi: np.ndarray
    label: str = "custom"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pi = np.array(self.pi, dtype=float).reshape(-1)
        if not np.all(np.isfinite(pi)):
            raise ValidationError("schedule entries must be finite")
        pi.setflags(write=False)
        object.__setattr__(self, "pi", pi)

    def __len__(self) -> int:
        return self.pi.size

    def __getitem__(self, t):
        return self.pi[t]

    def __array__(self, dtype=None, copy=None):
        return self.pi if dtype is None else self.pi.astype(dtype)


ScheduleLike = Union[StrategySchedule, Sequence[float], np.ndarray]


def as_schedule(schedule: ScheduleLike, T: Optional[int] = None) -> StrategySchedule:
    if not isinstance(schedule, StrategySchedule):
        schedule = StrategySchedule(np.asarray(schedule, dtype=float))
    if T is not None and len(schedule) != T:
        raise MismatchedHorizon(f"schedule has {len(schedule)} entries, horizon is {T}")
    return schedule


@dataclass(frozen=True)
class CoefficientTable:
    """Value-function coefficients for every period and the schedule they belong to.

    ``admissible[t]`` records ``1 - 2*alpha*E[t] > 0``. When a recursion was
    stopped by a violation, ``first_violation`` holds the offending step and the
    coefficients at and before it are NaN.
    """

    D: np.ndarray
    E: np.ndarray
    pi: StrategySchedule
    admissible: np.ndarray
    params: GarchParams
    prefs: Preferences
    kind: str = "optimal"
    first_violation: Optional[int] = None

    def __post_init__(self):
        for name in ("D", "E", "admissible"):
            getattr(self, name).setflags(write=False)

    @property
    def T(self) -> int:
        return self.D.size - 1

    @property
    def gamma(self) -> float:
        return self.prefs.gamma

    @property
    def is_admissible(self) -> bool:
        return self.first_violation is None and bool(np.all(self.admissible))

    def myopic(self) -> np.ndarray:
        """Myopic component of every allocation (constant in ``t``)."""
        lb = self.params.lam + 0.5
        return np.full(self.T, lb / (1.0 - self.gamma))

    def hedging(self) -> np.ndarray:
        """Hedging component of every allocation, computed from ``E[t+1]``."""
        return np.array([decompose(e, self.params, self.prefs)[1] for e in self.E[1:]])


@dataclass(frozen=True)
class WelReport:
    """Wealth-equivalent loss of a suboptimal schedule at one evaluation time."""

    loss: float
    Ds: float
    Es: float
    Dstar: float
    Estar: float
    h_next: float
    t: int


def _admissible_flags(params: GarchParams, E: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        return 1.0 - 2.0 * params.alpha * E > 0.0


def _warn_regime(prefs: Preferences) -> None:
    if prefs.gamma > 0:
        warnings.warn(
            f"gamma={prefs.gamma} > 0: closed form evaluated without an optimality proof",
            ConjecturedOptimalityWarning,
            stacklevel=3,
        )


def solve_optimal(params: GarchParams, prefs: Preferences, *, strict: bool = True) -> CoefficientTable:
    """Optimal coefficients ``D, E`` and allocation schedule ``pi*``.

    Each backward step computes ``pi*_t`` from ``E[t+1]``, then ``E[t]`` (which
    uses ``pi*_t``), then ``D[t]``.

    Parameters
    ----------
    strict : raise :class:`InadmissibleCoefficient` when ``1 - 2*alpha*E[t+1] <= 0``.
        With ``strict=False`` the table is returned flagged instead.
    """
    validate(params)
    _warn_regime(prefs)
    D, E, pi, bad_t, bad_value = _kernels.optimal_backward(
        params.alpha, params.beta, params.theta, params.omega,
        params.lam, params.r, float(prefs.gamma), prefs.T,
    )
    first = None
    if bad_t >= 0:
        if strict:
            raise InadmissibleCoefficient(int(bad_t), float(bad_value))
        first = int(bad_t)
        pi = np.nan_to_num(pi, nan=0.0)
    return CoefficientTable(
        D=D, E=E, pi=StrategySchedule(pi, label="optimal"),
        admissible=_admissible_flags(params, E), params=params, prefs=prefs,
        kind="optimal", first_violation=first,
    )


def decompose(E_next: float, params: GarchParams, prefs: Preferences) -> tuple[float, float]:
    """Split the optimal weight into myopic and hedging demand.

    Returns
    -------
    (myopic, hedging) : the single-period weight ``(lam + 1/2) / (1 - gamma)``
        and the horizon-dependent correction driven by ``E_next = E[t+1]``::

            hedging = [(1-gamma)(theta+lam+1/2) - (lam+1/2)] * 2 alpha E_next
                      / ((1-gamma) * (gamma - (1 - 2 alpha E_next)))

        The two parts add up to the optimal weight.
    """
    gamma = prefs.gamma
    a = 1.0 - 2.0 * params.alpha * E_next
    if not a > 0:
        raise InadmissibleCoefficient(-1, a)
    lb = params.lam + 0.5
    myopic = lb / (1.0 - gamma)
    if E_next == 0.0:
        return myopic, 0.0
    numer = ((1.0 - gamma) * (params.theta + lb) - lb) * 2.0 * params.alpha * E_next
    hedging = numer / ((1.0 - gamma) * (gamma - a))
    return myopic, hedging


def evaluate_suboptimal(
    params: GarchParams, prefs: Preferences, schedule: ScheduleLike, *, strict: bool = True
) -> CoefficientTable:
    """Value-function coefficients ``D^s, E^s`` of a fixed allocation schedule."""
    validate(params)
    schedule = as_schedule(schedule, prefs.T)
    T, gamma = prefs.T, prefs.gamma
    alpha, theta, omega, r = params.alpha, params.theta, params.omega, params.r
    persistence = params.persistence
    lb = params.lam + 0.5
    D = np.zeros(T + 1)
    E = np.zeros(T + 1)
    first = None
    d, e = 0.0, 0.0
    pi = schedule.pi
    for t in range(T - 1, -1, -1):
        a = 1.0 - 2.0 * alpha * e
        if not a > 0:
            if strict:
                raise InadmissibleCoefficient(t, a)
            first = t
            D[: t + 1] = np.nan
            E[: t + 1] = np.nan
            break
        p = float(pi[t])
        lin = gamma * p - 2.0 * theta * alpha * e
        d = d + e * omega + gamma * r - 0.5 * math.log1p(-2.0 * alpha * e)
        e = persistence * e + lin * lin / (2.0 * a) + gamma * (lb * p - 0.5 * p * p)
        D[t] = d
        E[t] = e
    return CoefficientTable(
        D=D, E=E, pi=schedule, admissible=_admissible_flags(params, E),
        params=params, prefs=prefs, kind="suboptimal", first_violation=first,
    )


def value_at(table: CoefficientTable, t: int, w: float, h_next: float) -> float:
    """Expected terminal utility at time ``t`` given log-wealth ``w`` and variance ``h_{t+1}``."""
    if not 0 <= t <= table.T:
        raise IndexError(f"t={t} outside [0, {table.T}]")
    g = table.gamma
    return math.exp(table.D[t] + g * w + table.E[t] * h_next) / g


def expected_utility(params: GarchParams, prefs: Preferences, schedule: ScheduleLike, h1: float) -> float:
    """Closed-form ``E_0[U(V_T)]`` of a schedule started at ``w0`` with first-period variance ``h1``."""
    table = evaluate_suboptimal(params, prefs, schedule)
    return value_at(table, 0, prefs.w0, h1)


def wealth_equivalent_loss(
    opt: CoefficientTable, sub: CoefficientTable, t: int, h_next: float
) -> WelReport:
    """Fraction of wealth an optimal investor could give up and still match ``sub``."""
    if opt.T != sub.T or opt.gamma != sub.gamma:
        raise MismatchedHorizon(
            f"tables disagree: T={opt.T}/{sub.T}, gamma={opt.gamma}/{sub.gamma}"
        )
    if opt.params != sub.params:
        raise MismatchedHorizon("tables were computed under different model parameters")
    dD = sub.D[t] - opt.D[t]
    dE = sub.E[t] - opt.E[t]
    loss = -math.expm1((dD + dE * h_next) / opt.gamma)
    return WelReport(
        loss=loss, Ds=float(sub.D[t]), Es=float(sub.E[t]),
        Dstar=float(opt.D[t]), Estar=float(opt.E[t]), h_next=h_next, t=t,
    )


def check_monotone_E(table: CoefficientTable, atol: float = COEF_ATOL) -> bool:
    """True iff ``E[t] <= E[t+1]`` for all ``t`` (up to ``atol``)."""
    E = table.E
    if np.any(np.isnan(E)):
        return False
    return bool(np.all(np.diff(E) >= -atol))
