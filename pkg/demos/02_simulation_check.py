"""
Closed forms against Monte Carlo
================================

Run the slot-level simulator under the optimal policy and compare its
long-run averages with the analytic values.
"""

import numpy as np

from aoi_cae import (
    SimConfig,
    aoi_stationary_distribution,
    exact_joint_stationary,
    closed_form_joint,
    run,
    solve_srp,
    stationary_distribution,
    table1,
)

inst = table1()
sol = solve_srp(inst)
res = run(inst, sol.policy, SimConfig(slots=1_000_000, seed=42, warmup_slots=10_000))

print("%-6s %10s %10s %8s" % ("", "analytic", "simulated", "std.err"))
for name, exact, sim, key in (
    ("AoI", sol.aoi, res.avg_aoi, "aoi"),
    ("psi", sol.psi_star, res.empirical_psi, "psi"),
    ("CAE", sol.cae, res.avg_cae, "cae"),
    ("cost", sol.cost, res.avg_cost, "cost"),
):
    print("%-6s %10.5f %10.5f %8.5f" % (name, exact, sim, res.stderr[key]))

# The closed-form joint table of (state, estimate) assumes the source
# forgets its past in one slot.  This source does not (p01 + p10 = 1.1),
# so compare against the exact four-state chain as well.
dist = stationary_distribution(inst.source)
closed = closed_form_joint(dist, sol.psi_star).p
exact = exact_joint_stationary(inst.source, sol.psi_star).p
print("\njoint P(x, x_hat): closed form / exact chain / simulated")
for x in (0, 1):
    for xh in (0, 1):
        print(f"  ({x},{xh})  {closed[x, xh]:.5f}  {exact[x, xh]:.5f}  {res.joint.p[x, xh]:.5f}")

# Age distribution: with equal reset weights it is geometric.
pmf = aoi_stationary_distribution(sol.psi_star, inst.weights, dist, 8)
hist = res.aoi_histogram
print("\nage  pmf      empirical")
for k, p in zip(pmf.ages, pmf.probs):
    print(f"{k:3d}  {p:.5f}  {hist[k]:.5f}")
print("tail beyond 8: %.2e analytic" % pmf.tail_mass)
print("max |pmf - hist| = %.1e" % np.max(np.abs(pmf.probs - hist[pmf.ages])))
