"""
Which action does the optimum use?
==================================

Vary the raw and processed transmission costs and report the dominant
action of the optimal policy in each cell.
"""

import numpy as np

from aoi_cae import GridSpec, sweep_costs, table1

base = table1()
table = sweep_costs(base, GridSpec("c_sr", 0.5, 0.9, 9), GridSpec("c_sp", 0.5, 0.9, 9))
p = {k: table.grid(k) for k in ("p_ns", "p_sr", "p_sp")}
dominant = np.argmax(np.stack([p["p_ns"], p["p_sr"], p["p_sp"]]), axis=0)

csr, csp = table.grids[0].values(), table.grids[1].values()
print("rows: c_sr, columns: c_sp  (N idle, R raw, P processed)")
print("        " + " ".join("%4.2f" % v for v in csp))
for i, v in enumerate(csr):
    print("%4.2f    " % v + "    ".join("NRP"[d] for d in dominant[i]))

# Processed samples succeed more often, so they win unless they cost much
# more than raw ones; then the budget is better spent on raw transmissions.
i, j = 4, 0
print(f"\ncell c_sr={csr[i]:.2f} c_sp={csp[j]:.2f}: "
      f"p_ns={p['p_ns'][i, j]:.3f} p_sr={p['p_sr'][i, j]:.3f} p_sp={p['p_sp'][i, j]:.3f}")
