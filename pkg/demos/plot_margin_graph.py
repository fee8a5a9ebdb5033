"""
Capture discs under time margins
================================

If every step has to happen within a time margin, the points that can be
captured in N steps fill a disc about the ICP whose radius grows with N
toward a finite limit. Intersecting it with the reachable disc tells how
many steps are needed; the first step aims at the reachable point closest
to the ICP.
"""

import math

import numpy as np

from legcap.margin import (
    MarginGraph,
    bang_bang_target,
    min_capture_steps,
    radii,
    radii_limit,
)

L = 1.0
graph = MarginGraph.uniform(center=[0.0, 0.0], L=L, delta=math.log(2), n=6)
print("radii:", np.round(graph.radii, 4), " limit:", radii_limit(L, math.log(2)))

for ankle in ([0.5, 0.0], [1.2, 0.9], [1.5, 1.0], [2.5, 0.0]):
    n = min_capture_steps([0.0, 0.0], ankle, graph)
    target = bang_bang_target([0.0, 0.0], ankle, graph)
    print(f"ankle {ankle}: steps {n}, first target {target}")

# a long pause before the third step shrinks the disc again
print("with a long last margin:", np.round(radii(L, [math.log(2), 2.0]), 4))

graph.to_svg("margin_graph.svg", ankle=[1.2, 0.9])
graph.to_csv("radii.csv")
