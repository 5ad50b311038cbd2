"""
Solve time against feature count
================================

Mean wall time of a full solve (constraints, null space, candidates,
selection) for growing feature sets, and the log-log slope of that curve.
"""

import numpy as np

from triview_pose.simulation import runtime_profile

counts = (8, 16, 32, 64, 90)
prof = runtime_profile(counts, trials=30)
for n, ms in prof:
    print(f"{n:3d} features  {ms:6.1f} ms")
n, ms = np.array(prof).T
print(f"log-log slope {np.polyfit(np.log(n), np.log(ms), 1)[0]:.2f}")

# the fixed cost of the candidate search dominates at small sizes, so the
# curve is flatter than linear over this range
