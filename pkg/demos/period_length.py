"""What happens to the optimal weight as trading gets more frequent.

Daily parameters are rescaled to periods of ``delta`` days and the initial
weight is compared with the fine-grid (continuous rebalancing) limit.
"""
import numpy as np

from hngarch_portfolio import (
    CHRISTOFFERSEN,
    Preferences,
    convergence_sweep,
    limit_moment_check,
    long_run_variance,
    merton_weight,
    scale_params,
)
from hngarch_portfolio.limits import SCALING_CONVENTION

params = CHRISTOFFERSEN
print("scaling:", SCALING_CONVENTION)
print("half-day parameters:", scale_params(params, 0.5).scaled)

for gamma, horizon in ((-5.0, 1260), (0.5, 1260)):
    rows = convergence_sweep(params, Preferences(gamma, horizon), horizon)
    print(f"\ngamma={gamma}, horizon={horizon} days, Merton weight {merton_weight(params, gamma):.6f}")
    print(f"continuous-rebalancing limit {rows[0].pi_heston:.6f}")
    for r in rows:
        print(f"  delta=2^{int(np.log2(r.delta)):<4d} pi_0={r.pi_0:.6f}  gap={r.gap:+.2e}")

# One rebalance over a one-day horizon is just the Merton problem.
one = convergence_sweep(params, Preferences(-5.0, 1), 1.0, deltas=[1.0])[0]
print(f"\nsingle rebalance: {one.pi_0:.6f} vs Merton {merton_weight(params, -5.0):.6f}")

# Per-unit-time moments of the discrete step approach their diffusion limits.
v = long_run_variance(params)
for delta in (1e-1, 1e-2, 1e-3, 1e-4):
    res = limit_moment_check(params, delta, pi=0.56, v=v).residuals
    print(f"delta={delta:g}: correlation residual {res['correlation']:+.2e}, "
          f"vol-of-variance residual {res['variance_variance']:+.2e}")
