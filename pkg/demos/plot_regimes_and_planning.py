"""
Timed steps, full-reach steps and the planner
=============================================

For a fixed reach, small pushes are best absorbed by timing the steps
(interior optimum); large pushes drive one or more steps to full reach.
The decision boundary separates the two, and the planner uses it to
pick a sequence with the least actuation.
"""

from legcap import SwingKernel
from legcap.capturability import (
    RobotSpec,
    decision_boundary,
    max_disturbance,
    min_actuation,
    plan_steps,
    replay_plan,
)

a = 1.66
for ratio in (9.0, 3.0, 1.0):
    res = max_disturbance(SwingKernel(1.0, a, ratio), 2)
    print(f"l_max/k={ratio}: d_max={res.d:.5f} regime={res.regime} "
          f"taus={[round(t, 4) for t in res.sequence.taus]}")

spec = RobotSpec(a=a, l_max=1.0)
for n in (1, 2):
    print(f"N={n} decision boundary:", decision_boundary(spec, n))

for d in (0.05, 0.15, 0.3):
    res = min_actuation(spec, d, 2)
    print(f"d={d}: k_min={res.k_min:.4f} regime={res.regime}")

robot = RobotSpec(a=a, l_max=1.0)
for d in (0.1, 0.3, 0.44, 0.5):
    plan = plan_steps(robot, k_available=1.0, d=d, n_max=2)
    if not plan.capturable:
        print(f"d={d}: not capturable with two steps")
        continue
    print(f"d={d}: {plan.n_steps} step(s), {plan.regime}, k={plan.k:.4f}, "
          f"replay miss {replay_plan(plan, robot):.1e}")
