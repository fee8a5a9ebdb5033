"""
Stepping onto the capture point
===============================

The inverted pendulum carries its instantaneous capture point (ICP) away
from the stance ankle exponentially. Placing the ankle exactly on the ICP
stops the robot; missing it by a little lets the error grow as e^t.
"""

import numpy as np

from legcap.lipm import PendulumState, evolve_icp, simulate

# a state moving forward; the ICP sits at x + v
state = PendulumState(x_com=0.1, v_com=0.3, x_ankle=0.0)
print("ICP:", state.icp)

# step right onto it
on = simulate(PendulumState(0.1, 0.3, state.icp), t_end=8.0)
print("v_com after 8 time units:", on.v_com[-1], " expected", 0.3 * np.exp(-8))

# miss by one millimetre per metre of CoM height
off = simulate(PendulumState(0.1, 0.3, state.icp - 1e-3), t_end=8.0)
gap = np.abs(off.x_ic - off.x_ankle)
for t in (0, 2, 4, 6, 8):
    i = int(round(t / 1e-3))
    print(f"t={t}: ICP-ankle gap {gap[i]:.3e}  vs 1e-3 e^t = {1e-3 * np.exp(t):.3e}")

# the closed form used everywhere else agrees with integration
print("closed form:", evolve_icp(0.2, 0.0, 1.0), " RK4:",
      simulate(PendulumState(0.2, 0.0, 0.0), t_end=1.0).x_ic[-1])

off.to_csv("pendulum_off_icp.csv")
