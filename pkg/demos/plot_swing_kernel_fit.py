"""
Fitting a power-law swing kernel
================================

A swing leg driven by constant hip torque reaches further the longer it
swings. Simulating the leg and fitting ``l = k tau**a`` in log-log space
gives the kernel used by the step planner.
"""

import numpy as np

from legcap.kernel import SwingKernel, calibrate, swing_sim

taus = np.linspace(0.1, 1.0, 30)

print("torque      k        a       r2")
for torque in (0.2, 0.4, 0.6, 0.8, 1.0):
    fit = calibrate(swing_sim(torque, 1.0, taus))
    print(f"{torque:5.1f}  {fit.k:8.4f} {fit.a:8.4f} {fit.r_squared:9.6f}")

# stronger hips mean larger k; the exponent barely moves
kernel = SwingKernel(k=1.0, a=1.66, l_max=1.0)
print("step time needed for full reach:", kernel.tau_max)
print("time for half reach:", kernel.inverse(0.5))
