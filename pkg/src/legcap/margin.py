"""Time-margin capture regions for a pendulum with a finite foot reach.

Given a reach ``L`` and time margins ``Delta_1, Delta_2, ...``, the N-step
capture points lie in a disc of radius ``R_N`` about the current ICP, with
``R_1 = 0`` and ``R_n = (L + R_{n-1}) * exp(-Delta_{n-1})``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np


def _check_positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")


def radii(L: float, margins) -> list[float]:
    """``[R_1, ..., R_N]`` for margins ordered ``[Delta_1, ..., Delta_{N-1}]``.

    A margin of ``math.inf`` is accepted and collapses the next radius to 0.
    """
    _check_positive("L", L)
    out = [0.0]
    for delta in margins:
        if not delta > 0:
            raise ValueError(f"margins must be positive, got {delta!r}")
        out.append((L + out[-1]) * math.exp(-delta))
    return out


def radii_uniform(L: float, delta: float, n: int) -> float:
    """Closed-form ``R_N`` when every margin equals ``delta``."""
    _check_positive("L", L)
    _check_positive("delta", delta)
    if n < 1:
        raise ValueError("n must be >= 1")
    q = math.exp(-delta)
    return L * (q - q ** n) / (1.0 - q)


def radii_limit(L: float, delta: float) -> float:
    """Supremum of ``R_N`` over ``N`` for a uniform margin."""
    q = math.exp(-delta)
    return L * q / (1.0 - q)


def radii_bound(L: float, margins) -> float:
    """Geometric-series bound on every radius using the smallest margin."""
    if len(margins) == 0:
        return 0.0
    return radii_limit(L, min(margins))


@dataclass(frozen=True)
class MarginGraph:
    """Concentric capture discs about the ICP.

    ``center`` is a scalar for one axis or a length-2 array in the plane.
    ``margins`` follow the ``radii`` ordering.
    """

    center: object
    L: float
    margins: tuple
    radii: tuple

    @classmethod
    def build(cls, center, L: float, margins) -> "MarginGraph":
        margins = tuple(float(m) for m in margins)
        return cls(np.asarray(center, dtype=float), float(L), margins,
                   tuple(radii(L, margins)))

    @classmethod
    def uniform(cls, center, L: float, delta: float, n: int) -> "MarginGraph":
        return cls.build(center, L, [delta] * (n - 1))

    @property
    def n_max(self) -> int:
        return len(self.radii)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "radius"])
            for n, r in enumerate(self.radii, start=1):
                w.writerow([n, f"{r:.17g}"])

    def to_svg(self, path, ankle=None, size: int = 400) -> None:
        from .svg import graph_svg

        with open(path, "w") as fh:
            fh.write(graph_svg(self, ankle, size))


def _distance(x_ic, x_ankle) -> float:
    diff = np.asarray(x_ic, dtype=float) - np.asarray(x_ankle, dtype=float)
    return float(np.linalg.norm(np.atleast_1d(diff)))


def min_capture_steps(x_ic, x_ankle, graph: MarginGraph) -> int | None:
    """Fewest steps whose capture disc touches the reachable disc.

    The reachable region is the closed disc of radius ``graph.L`` about the
    stance ankle (an interval on one axis). Tangency counts. Returns None
    when no disc of the graph reaches it.
    """
    gap = _distance(x_ic, x_ankle) - graph.L
    for n, r in enumerate(graph.radii, start=1):
        if gap <= r * (1 + 1e-12) + 1e-15:
            return n
    return None


def bang_bang_target(x_ic, x_ankle, graph: MarginGraph):
    """Reachable foot placement closest to the ICP, or None if not capturable."""
    if min_capture_steps(x_ic, x_ankle, graph) is None:
        return None
    ic = np.asarray(x_ic, dtype=float)
    ankle = np.asarray(x_ankle, dtype=float)
    dist = _distance(ic, ankle)
    if dist <= graph.L:
        target = ic
    else:
        target = ankle + (ic - ankle) * (graph.L / dist)
    return float(target) if target.ndim == 0 else target
