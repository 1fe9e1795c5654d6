"""
Where is the problem feasible?
==============================

Sweep the cost budget c0 and the CAE bound d0 and draw the status of each
cell as a character map, with the optimal AoI along a few rows.
"""

import numpy as np

from aoi_cae import GridSpec, cae_coefficients, stationary_distribution, sweep_bounds, table1

base = table1()
table = sweep_bounds(base, GridSpec("c0", 0.0, 2.0, 41), GridSpec("d0", -1.5, 1.5, 31))
status = np.array(table.column("status")).reshape(41, 31)
symbol = {"Feasible": ".", "InfeasibleCost": "$", "InfeasibleCae": "x", "UnboundedAoi": "o"}

c0s, d0s = table.grids[0].values(), table.grids[1].values()
print("rows: c0 from 0 to 2, columns: d0 from -1.5 to 1.5")
print("legend: . feasible  $ budget too small  x CAE bound too tight  o never delivers\n")
for i in range(0, 41, 2):
    print("c0=%4.2f  %s" % (c0s[i], "".join(symbol[s] for s in status[i])))

# Below c0 = c_ns even idling is unaffordable.  The CAE edge bends with c0
# because a bigger budget buys a higher success rate, and with xi < 0 that
# lowers the achievable CAE.
coeffs = cae_coefficients(base.penalty, stationary_distribution(base.source))
print("\nzeta = %.4f, xi = %.4f" % (coeffs.zeta, coeffs.xi))

aoi = table.grid("aoi")
j = int(np.searchsorted(d0s, 1.0))
print("\nAoI along d0 = %.2f:" % d0s[j])
for i in range(0, 41, 5):
    print("  c0=%4.2f  %s" % (c0s[i], "-" if np.isnan(aoi[i, j]) else "%.4f" % aoi[i, j]))
