"""Walk through the closed-form optimal allocation for one investor.

Run with ``python3 demos/optimal_allocation.py``.
"""
import numpy as np

from hngarch_portfolio import (
    CHRISTOFFERSEN,
    Preferences,
    evaluate_suboptimal,
    heston_schedule,
    long_run_variance,
    merton_schedule,
    solve_optimal,
    value_at,
    wealth_equivalent_loss,
)

params = CHRISTOFFERSEN
hbar = long_run_variance(params)
print(f"persistence {params.persistence:.6f}, long-run daily variance {hbar:.4e}")
print(f"annualised long-run volatility {np.sqrt(252 * hbar):.4f}")

# A one-year investor with relative risk aversion 1 - gamma = 6.
prefs = Preferences(gamma=-5.0, T=252)
table = solve_optimal(params, prefs)

myopic, hedging = table.myopic(), table.hedging()
print("\n  t    pi*      myopic   hedging")
for t in (0, 63, 126, 189, 250, 251):
    print(f"{t:4d}  {table.pi[t]:.6f}  {myopic[t]:.6f}  {hedging[t]:+.6f}")

# The hedging demand is what distinguishes the dynamic policy from Merton's.
# It is largest far from the horizon and vanishes in the last period.
print(f"\nvalue at t=0, w=0, h=hbar: {value_at(table, 0, 0.0, hbar):.7f}")

# How much wealth would an optimal investor give up to avoid being forced
# onto a simpler rule? Longer horizons make the difference visible.
long_prefs = Preferences(gamma=-5.0, T=2520)
opt = solve_optimal(params, long_prefs)
for name, schedule in (
    ("merton", merton_schedule(params, long_prefs)),
    ("heston", heston_schedule(params, long_prefs)),
):
    sub = evaluate_suboptimal(params, long_prefs, schedule)
    loss = wealth_equivalent_loss(opt, sub, 0, hbar).loss
    print(f"ten-year wealth-equivalent loss of the {name} rule: {loss:.3e}")

# Doubling the risk premium inflates the cost of ignoring the hedging term.
rich = params.with_(lam=2 * params.lam)
opt2 = solve_optimal(rich, long_prefs)
sub2 = evaluate_suboptimal(rich, long_prefs, merton_schedule(rich, long_prefs))
print(f"same with lambda doubled: {wealth_equivalent_loss(opt2, sub2, 0, hbar).loss:.3e}")
