"""Dimensionless linear inverted pendulum, one horizontal axis at a time.

Lengths are normalized by the CoM height and time by the inverse pendulum
eigenfrequency, so the per-axis dynamics read ``x'' = x - x_ankle`` and the
instantaneous capture point (ICP) ``x_ic = x + v`` obeys ``x_ic' = x_ic - x_ankle``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

G = 9.81

DEFAULT_DT = 1e-3


@dataclass(frozen=True)
class PendulumState:
    """CoM position, CoM velocity and stance-ankle location on one axis."""

    x_com: float
    v_com: float
    x_ankle: float

    def __post_init__(self):
        for name in ("x_com", "v_com", "x_ankle"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def icp(self) -> float:
        return self.x_com + self.v_com


def icp(state: PendulumState) -> float:
    """Instantaneous capture point of ``state``."""
    return state.x_com + state.v_com


def icp_2d(com, com_velocity) -> np.ndarray:
    """Planar ICP; the axes decouple so this is just the per-axis sum."""
    return np.asarray(com, dtype=float) + np.asarray(com_velocity, dtype=float)


def evolve_icp(x_ic0, x_ankle, t):
    """ICP after a time ``t`` spent on a fixed ankle.

    Accepts scalars or numpy arrays (e.g. planar points).
    """
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be non-negative")
    return (x_ic0 - x_ankle) * np.exp(t) + x_ankle


def is_captured(state: PendulumState, tol: float = 1e-9) -> bool:
    """True when the ICP sits on the stance ankle within ``tol``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    return abs(icp(state) - state.x_ankle) <= tol


def to_dimensionless(com_height: float, length=None, time=None, velocity=None,
                     g: float = G):
    """Normalize SI quantities by CoM height ``com_height`` [m].

    Returns a tuple with one entry per quantity given, in the order
    (length, time, velocity).
    """
    if not com_height > 0:
        raise ValueError("com_height must be positive")
    omega = math.sqrt(g / com_height)
    out = []
    if length is not None:
        out.append(length / com_height)
    if time is not None:
        out.append(time * omega)
    if velocity is not None:
        out.append(velocity / (com_height * omega))
    return tuple(out)


def rk4(rhs: Callable[[float, np.ndarray], np.ndarray], y0, dt: float,
        t_end: float, t0: float = 0.0):
    """Classical fixed-step Runge-Kutta integration of ``y' = rhs(t, y)``.

    The last step is shortened so the final sample lands on ``t_end``.

    Returns
    -------
    ts : (n+1,) ndarray
    ys : (n+1, dim) ndarray
    """
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError("dt must be positive and finite")
    if not (t_end >= t0 and math.isfinite(t_end)):
        raise ValueError("t_end must be finite and >= t0")
    span = t_end - t0
    n = int(math.ceil(span / dt - 1e-9)) if span > 0 else 0
    y = np.array(y0, dtype=float)
    ts = np.empty(n + 1)
    ys = np.empty((n + 1, y.size))
    ts[0] = t0
    ys[0] = y
    t = t0
    for i in range(n):
        h = min(dt, t_end - t) if i == n - 1 else dt
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (i + 1) * dt if i < n - 1 else t_end
        ts[i + 1] = t
        ys[i + 1] = y
    return ts, ys


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    x_com: np.ndarray
    v_com: np.ndarray
    x_ankle: float

    @property
    def x_ic(self) -> np.ndarray:
        return self.x_com + self.v_com

    def __len__(self):
        return len(self.t)

    def __iter__(self) -> Iterator[tuple[float, PendulumState]]:
        for t, x, v in zip(self.t, self.x_com, self.v_com):
            yield float(t), PendulumState(float(x), float(v), self.x_ankle)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "x_com", "v_com", "x_ankle", "x_ic"])
            for row in zip(self.t, self.x_com, self.v_com, self.x_ic):
                t, x, v, xi = (float(r) for r in row)
                w.writerow([f"{t:.17g}", f"{x:.17g}", f"{v:.17g}",
                            f"{self.x_ankle:.17g}", f"{xi:.17g}"])


def simulate(state0: PendulumState, t_end: float,
             dt: float = DEFAULT_DT) -> Trajectory:
    """Integrate the pendulum with RK4 while the ankle stays put."""
    ankle = state0.x_ankle

    def rhs(_t, y):
        return np.array([y[1], y[0] - ankle])

    ts, ys = rk4(rhs, [state0.x_com, state0.v_com], dt, t_end)
    return Trajectory(ts, ys[:, 0], ys[:, 1], ankle)
