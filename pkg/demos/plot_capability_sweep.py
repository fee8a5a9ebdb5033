"""
How much push can N steps absorb?
=================================

Sweep the actuation coefficient ``k`` and the reach ``l_max`` and record
the largest push each step count can resist. Heat maps land in
``sweep_out/`` as SVG.
"""

import numpy as np

from legcap.sweep import SweepGrid, run_sweep

grid = SweepGrid(k_values=tuple(np.logspace(-1, 1, 8)),
                 l_values=tuple(np.linspace(0.1, 2.0, 8)), n_max=4)
report = run_sweep(grid)
report.write("sweep_out", svg=True)

d = report.array()
print("d_max at k=10, l_max=2 for N=1..4:", np.round(d[-1, -1], 4))
print("d_max at k=0.1, l_max=2 for N=1..4:", np.round(d[0, -1], 4))
print("monotonicity violations:", report.monotonicity_violations())

for inc in report.increments:
    print(f"{inc.n_from}->{inc.n_to}: mean {inc.mean_pct:6.2f}%  "
          f"range [{inc.min_pct:.2f}, {inc.max_pct:.2f}]%")

# Where the reach binds, a second full-length step lands the swing foot
# exactly a step ahead of where the first step started, so it adds
# nothing; where timing binds, the second step adds close to 11%.
