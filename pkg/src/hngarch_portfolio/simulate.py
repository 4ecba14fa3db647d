"""Seeded Monte Carlo engine for HN-GARCH paths and portfolio wealth.

Every path owns a Philox substream keyed by the run seed with the path index in
the counter, so path ``i`` is the same whether it is generated alone, in a
chunk, or on another thread. Normals are obtained by inverse-CDF from 53-bit
uniforms on the open interval (0, 1).

Time indexing: column ``j`` of the shock matrix is ``z_{j+1}`` and column ``j``
of the variance matrix is ``h_{j+1}``. ``SimConfig.h0`` is therefore the
variance of the first period, already known at time 0.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Union

import numpy as np
from scipy.special import ndtri

from .errors import ValidationError
from .model import GarchParams, validate
from .recursion import Preferences, ScheduleLike, StrategySchedule, as_schedule
from .stats import RunningMoments

__all__ = [
    "SimConfig",
    "PathSet",
    "ReturnStats",
    "ReturnAccumulator",
    "CashFlowSummary",
    "GapSummary",
    "standard_normals",
    "simulate_paths",
    "iter_paths",
    "maintenance_cashflows",
    "terminal_wealth_gap",
    "return_statistics",
    "PERIODS_PER_YEAR",
    "QUANTILE_LEVELS",
]

PERIODS_PER_YEAR = 252
QUANTILE_LEVELS = (0.01, 0.05, 0.5, 0.95, 0.99)
_U53 = 2.0**-53


@dataclass(frozen=True)
class SimConfig:
    n_paths: int
    T: int
    seed: int
    h0: float
    x0: float = 0.0
    v0: float = 1.0

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ValidationError("n_paths must be a positive integer")
        if int(self.T) != self.T or self.T < 1:
            raise ValidationError("T must be a positive integer")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must fit in an unsigned 64-bit integer")
        if not self.h0 > 0:
            raise ValidationError("h0 must be positive")
        if not self.v0 > 0:
            raise ValidationError("v0 must be positive")


def standard_normals(seed: int, start: int, stop: int, T: int) -> np.ndarray:
    """Shocks of paths ``start .. stop-1``, shape ``(stop - start, T)``."""
    raw = np.empty((stop - start, T), dtype=np.uint64)
    for row, i in enumerate(range(start, stop)):
        bits = np.random.Philox(key=int(seed), counter=[0, i, 0, 0])
        raw[row] = bits.random_raw(T)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _U53
    return ndtri(u)


@dataclass(frozen=True)
class PathSet:
    """Simulated paths for rows ``start .. start + n - 1`` of a run.

    Attributes
    ----------
    z : (n, T) shocks ``z_1 .. z_T``
    h : (n, T+1) variances ``h_1 .. h_{T+1}``
    x : (n, T+1) log-prices ``X_0 .. X_T``
    w_proxy : (n, T+1) log-wealth under the approximated self-financing dynamics
    v_exact : (n, T+1) wealth under the exact self-financing dynamics
    cash : (n, T) cash injected each period to keep the exact dynamics on the
        proxy path, as a fraction of the wealth at the start of the period.
        Positive means the investor pays in.
    valid : (n,) False where exact wealth hit zero or below
    """

    z: np.ndarray
    h: np.ndarray
    x: np.ndarray
    w_proxy: np.ndarray
    v_exact: np.ndarray
    cash: np.ndarray
    valid: np.ndarray
    config: SimConfig
    schedule: StrategySchedule
    params: GarchParams
    start: int = 0

    @property
    def n(self) -> int:
        return self.z.shape[0]

    @property
    def T(self) -> int:
        return self.z.shape[1]


def simulate_paths(
    params: GarchParams,
    config: SimConfig,
    schedule: ScheduleLike,
    *,
    start: int = 0,
    stop: Optional[int] = None,
    shocks: Optional[np.ndarray] = None,
) -> PathSet:
    """Simulate paths ``start .. stop-1`` of the run described by ``config``.

    ``shocks`` replaces the generated normals (e.g. zeros for a deterministic
    check); it must have shape ``(stop - start, T)``.
    """
    validate(params)
    schedule = as_schedule(schedule, config.T)
    stop = config.n_paths if stop is None else stop
    if not 0 <= start < stop <= config.n_paths:
        raise ValueError(f"invalid path range [{start}, {stop})")
    n, T = stop - start, config.T
    if shocks is None:
        z = standard_normals(config.seed, start, stop, T)
    else:
        z = np.array(shocks, dtype=float)
        if z.shape != (n, T):
            raise ValueError(f"shocks must have shape {(n, T)}, got {z.shape}")

    omega, beta, alpha, theta = params.omega, params.beta, params.alpha, params.theta
    lam, r = params.lam, params.r
    growth_rf = math.exp(r)
    pi = schedule.pi

    h = np.empty((n, T + 1))
    x = np.empty((n, T + 1))
    w = np.empty((n, T + 1))
    v = np.empty((n, T + 1))
    cash = np.empty((n, T))
    h[:, 0] = config.h0
    x[:, 0] = config.x0
    w[:, 0] = math.log(config.v0)
    v[:, 0] = config.v0
    for j in range(T):
        ht = h[:, j]
        zt = z[:, j]
        sq = np.sqrt(ht)
        y = r + lam * ht + sq * zt
        p = pi[j]
        x[:, j + 1] = x[:, j] + y
        dw = p * y + (1.0 - p) * r + 0.5 * (p - p * p) * ht
        w[:, j + 1] = w[:, j] + dw
        gross = p * np.exp(y) + (1.0 - p) * growth_rf
        v[:, j + 1] = v[:, j] * gross
        cash[:, j] = np.exp(dw) - gross
        h[:, j + 1] = omega + beta * ht + alpha * (zt - theta * sq) ** 2
    valid = np.all(v[:, 1:] > 0, axis=1)
    return PathSet(
        z=z, h=h, x=x, w_proxy=w, v_exact=v, cash=cash, valid=valid,
        config=config, schedule=schedule, params=params, start=start,
    )


def iter_paths(
    params: GarchParams,
    config: SimConfig,
    schedule: ScheduleLike,
    chunk_size: int = 10_000,
    n_workers: int = 1,
) -> Iterator[PathSet]:
    """Yield the run in consecutive chunks of at most ``chunk_size`` paths.

    With ``n_workers > 1`` chunks are simulated on a thread pool; they are
    still yielded in path order and hold the same numbers.
    """
    bounds = [
        (a, min(a + chunk_size, config.n_paths))
        for a in range(0, config.n_paths, chunk_size)
    ]

    def run(bound):
        return simulate_paths(params, config, schedule, start=bound[0], stop=bound[1])

    if n_workers <= 1:
        for b in bounds:
            yield run(b)
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            yield from pool.map(run, bounds)


def _quantiles(values: np.ndarray, levels=QUANTILE_LEVELS) -> dict[float, float]:
    if values.size == 0:
        return {q: float("nan") for q in levels}
    return dict(zip(levels, np.quantile(values, levels).tolist()))


@dataclass(frozen=True)
class CashFlowSummary:
    """Distribution of the maintenance cash flows.

    ``daily`` pools every period of every path (fractions of current wealth);
    ``cumulative`` is the per-path sum of cash amounts over the horizon as a
    fraction of initial wealth.
    """

    cash: np.ndarray
    cumulative: np.ndarray
    daily_moments: RunningMoments
    cumulative_moments: RunningMoments
    daily_quantiles: dict
    cumulative_quantiles: dict


def maintenance_cashflows(paths: PathSet) -> CashFlowSummary:
    """Cash needed each period to reset the exact wealth onto the proxy path."""
    wealth_before = np.exp(paths.w_proxy[:, :-1])
    cumulative = (paths.cash * wealth_before).sum(axis=1) / paths.config.v0
    daily = paths.cash.reshape(-1)
    return CashFlowSummary(
        cash=paths.cash,
        cumulative=cumulative,
        daily_moments=RunningMoments.from_array(daily),
        cumulative_moments=RunningMoments.from_array(cumulative),
        daily_quantiles=_quantiles(daily),
        cumulative_quantiles=_quantiles(cumulative),
    )


@dataclass(frozen=True)
class GapSummary:
    gap: np.ndarray
    mean: float
    quantiles: dict
    n_excluded: int


def terminal_wealth_gap(paths: PathSet) -> GapSummary:
    """Exact minus proxy terminal wealth, per path, as a fraction of ``v0``.

    Paths whose exact wealth went nonpositive are excluded and counted.
    """
    gap = (paths.v_exact[:, -1] - np.exp(paths.w_proxy[:, -1])) / paths.config.v0
    gap = gap[paths.valid]
    mean = float(gap.mean()) if gap.size else float("nan")
    return GapSummary(
        gap=gap, mean=mean, quantiles=_quantiles(gap),
        n_excluded=int(paths.n - paths.valid.sum()),
    )


@dataclass(frozen=True)
class ReturnStats:
    """Moments of simple annual returns across paths.

    ``sharpe_ratio`` is mean over standard deviation of the raw return;
    ``excess_sharpe`` subtracts the annual risk-free return first.
    ``expected_utility`` is the sample mean of ``exp(gamma * W_T) / gamma``
    and ``utility_sem`` its standard error.
    """

    mean: float
    stdev: float
    skewness: float
    kurtosis: float
    sharpe_ratio: float
    excess_sharpe: float
    expected_utility: float
    utility_sem: float
    n: int


class ReturnAccumulator:
    """Mergeable reduction of terminal wealth into :class:`ReturnStats`.

    Feed chunks with :meth:`push`; ``which`` selects the proxy log-wealth or
    the exact wealth (paths that went bankrupt are skipped).
    """

    def __init__(self, prefs: Preferences, which: str = "proxy"):
        if which not in ("proxy", "exact"):
            raise ValueError("which must be 'proxy' or 'exact'")
        self.prefs = prefs
        self.which = which
        self.returns = RunningMoments()
        self.utility = RunningMoments()
        self.rate: Optional[float] = None

    def push(self, chunk: PathSet) -> "ReturnAccumulator":
        if self.which == "proxy":
            wT = chunk.w_proxy[:, -1]
        else:
            wT = np.log(chunk.v_exact[chunk.valid, -1])
        years = chunk.T / PERIODS_PER_YEAR
        self.returns.push(np.expm1((wT - math.log(chunk.config.v0)) / years))
        self.utility.push(np.exp(self.prefs.gamma * wT) / self.prefs.gamma)
        self.rate = chunk.params.r
        return self

    def result(self) -> ReturnStats:
        ret, util = self.returns, self.utility
        if ret.n == 0:
            raise ValueError("no paths to summarise")
        mean, stdev = ret.mean, ret.std(ddof=1)
        rf_annual = math.expm1(self.rate * PERIODS_PER_YEAR)
        ok = stdev > 0
        return ReturnStats(
            mean=mean, stdev=stdev, skewness=ret.skewness, kurtosis=ret.kurtosis,
            sharpe_ratio=mean / stdev if ok else float("nan"),
            excess_sharpe=(mean - rf_annual) / stdev if ok else float("nan"),
            expected_utility=util.mean,
            utility_sem=util.sem() if util.n > 1 else float("nan"),
            n=ret.n,
        )


def return_statistics(
    paths: Union[PathSet, Iterable[PathSet]],
    prefs: Preferences,
    which: str = "proxy",
) -> ReturnStats:
    """Return and utility statistics of the proxy or exact terminal wealth.

    Accepts one :class:`PathSet` or an iterable of chunks. Returns are
    annualised with 252 periods per year (exact for a 252-period run).
    """
    acc = ReturnAccumulator(prefs, which)
    for chunk in [paths] if isinstance(paths, PathSet) else paths:
        acc.push(chunk)
    return acc.result()
