"""Mergeable one-pass accumulator for the first four central moments."""
from __future__ import annotations

import math

import numpy as np

__all__ = ["RunningMoments"]


class RunningMoments:
    """Count, mean and central sums ``M2..M4`` that can be fed in batches and merged.

    Batches are reduced exactly (two-pass within the batch) and combined with
    the pairwise update of Pebay (2008), so the result does not depend on how
    the data were split beyond floating round-off.

    >>> m = RunningMoments()
    >>> m.push(np.arange(10.0))
    >>> round(m.mean, 12), round(m.variance(ddof=0), 12)
    (4.5, 8.25)
    """

    __slots__ = ("n", "mean", "M2", "M3", "M4")

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.M2 = 0.0
        self.M3 = 0.0
        self.M4 = 0.0

    @classmethod
    def from_array(cls, x) -> "RunningMoments":
        x = np.asarray(x, dtype=float).reshape(-1)
        m = cls()
        if x.size:
            m.n = int(x.size)
            m.mean = float(x.mean())
            d = x - m.mean
            d2 = d * d
            m.M2 = float(d2.sum())
            m.M3 = float((d2 * d).sum())
            m.M4 = float((d2 * d2).sum())
        return m

    def push(self, x) -> None:
        self.merge(RunningMoments.from_array(x))

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        if other.n == 0:
            return self
        if self.n == 0:
            self.n, self.mean = other.n, other.mean
            self.M2, self.M3, self.M4 = other.M2, other.M3, other.M4
            return self
        na, nb = self.n, other.n
        n = na + nb
        delta = other.mean - self.mean
        d2 = delta * delta
        M2 = self.M2 + other.M2 + d2 * na * nb / n
        M3 = (
            self.M3 + other.M3
            + d2 * delta * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.M2 - nb * self.M2) / n
        )
        M4 = (
            self.M4 + other.M4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n**3)
            + 6.0 * d2 * (na * na * other.M2 + nb * nb * self.M2) / (n * n)
            + 4.0 * delta * (na * other.M3 - nb * self.M3) / n
        )
        self.n = n
        self.mean = self.mean + delta * nb / n
        self.M2, self.M3, self.M4 = M2, M3, M4
        return self

    def __add__(self, other: "RunningMoments") -> "RunningMoments":
        out = RunningMoments()
        out.merge(self)
        out.merge(other)
        return out

    def variance(self, ddof: int = 1) -> float:
        if self.n - ddof <= 0:
            return float("nan")
        return self.M2 / (self.n - ddof)

    def std(self, ddof: int = 1) -> float:
        return math.sqrt(self.variance(ddof))

    def sem(self) -> float:
        """Standard error of the mean."""
        return self.std(ddof=1) / math.sqrt(self.n)

    @property
    def skewness(self) -> float:
        """Population (biased) skewness ``m3 / m2**1.5``; NaN for zero spread."""
        if self.n == 0 or not self.M2 > 0:
            return float("nan")
        return math.sqrt(self.n) * self.M3 / self.M2**1.5

    @property
    def kurtosis(self) -> float:
        """Population (non-excess) kurtosis ``m4 / m2**2``; NaN for zero spread."""
        if self.n == 0 or not self.M2 > 0:
            return float("nan")
        return self.n * self.M4 / (self.M2 * self.M2)

    def __repr__(self) -> str:
        return f"RunningMoments(n={self.n}, mean={self.mean:.6g}, var={self.variance(0):.6g})"
