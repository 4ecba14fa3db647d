"""Compiled inner loops.

The optimal recursion is run with millions of steps by the fine-grid
continuous-time baseline, so it is jitted. Everything else stays in plain
Python/numpy.
"""
from __future__ import annotations

import math

import numba
import numpy as np


@numba.njit(cache=True)
def optimal_backward(alpha, beta, theta, omega, lam, r, gamma, n):
    """Backward pass for the optimal (D, E, pi) coefficients over ``n`` periods.

    Returns ``(D, E, pi, bad_t, bad_value)``; ``bad_t`` is -1 when every step
    was admissible, otherwise the step at which ``1 - 2*alpha*E[t+1] <= 0``
    (entries at and before it are NaN).
    """
    D = np.zeros(n + 1)
    E = np.zeros(n + 1)
    pi = np.full(n, np.nan)
    persistence = beta + alpha * theta * theta
    lb = lam + 0.5
    for t in range(n - 1, -1, -1):
        e1 = E[t + 1]
        two_ae = 2.0 * alpha * e1
        a = 1.0 - two_ae
        if not a > 0.0:
            for k in range(t + 1):
                D[k] = np.nan
                E[k] = np.nan
            return D, E, pi, t, a
        # pi -> E -> D: the E update needs pi_t.
        p_t = (lb - (theta + lb) * two_ae) / (a - gamma)
        pi[t] = p_t
        lin = gamma * p_t - 2.0 * theta * alpha * e1
        E[t] = persistence * e1 + lin * lin / (2.0 * a) + gamma * (lb * p_t - 0.5 * p_t * p_t)
        D[t] = D[t + 1] + e1 * omega + gamma * r - 0.5 * math.log1p(-two_ae)
    return D, E, pi, -1, 1.0
