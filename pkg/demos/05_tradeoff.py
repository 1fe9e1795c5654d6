"""
Freshness against actuation error
=================================

For several sources, degrade the channel and track the optimal AoI and CAE.
"""

from aoi_cae import closed_form_gap, table1, tradeoff_scan
from aoi_cae.model import SourceModel

triples = [(p01, p10, ch) for p01, p10 in ((0.5, 0.5), (0.1, 0.9), (0.35, 0.75)) for ch in (0.9, 0.7, 0.5, 0.3)]
table = tradeoff_scan(triples, table1())

print(" p01  p10  p_chnl     AoI      CAE")
for r in table.records:
    print(f"{r['p01']:4.2f} {r['p10']:4.2f}  {r['p_chnl']:5.2f}  {r['aoi']:7.4f}  {r['cae']:7.4f}")

# A worse channel lowers the success rate, so both metrics rise.  The
# lopsided source (0.1, 0.9) spends most of its time in one state, which
# makes a stale estimate less often wrong.

# The closed-form CAE is exact only when p01 + p10 = 1.  For the others the
# exact four-state chain gives the true value.
for p01, p10 in ((0.5, 0.5), (0.1, 0.9), (0.35, 0.75), (0.05, 0.05)):
    gap = closed_form_gap(SourceModel(p01, p10), table1().penalty, 0.5)
    print(f"source ({p01}, {p10}): closed form {gap['cae_closed_form']:.4f}, exact {gap['cae_exact_chain']:.4f}")
