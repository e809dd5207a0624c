"""Integrate the diagonal kernel over a fundamental domain.

The integral of the diagonal kernel norm over the surface equals the
dimension of the space of cusp forms, here k - 2 on the level-two
surface.  This is the sharpest single check on the normalisation.
"""

from hypbergman import built_in_group, run_trace_check

G = built_in_group("gamma2_width1")
rep = run_trace_check(G, [2, 3, 4, 5], mesh=0.1)
for k, val, expected, rel in rep.table():
    print(f"k={k}: trace {val:.5f}  dim S_2k = {expected}  error {rel:.2e}")
