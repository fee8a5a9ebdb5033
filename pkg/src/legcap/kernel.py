"""Swing-leg kernels: achievable step length as a function of step time."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .lipm import DEFAULT_DT, rk4

DEFAULT_EXPONENT = 1.66

# slack on the reach bound so optimizer output clipped to tau_max is accepted
_REACH_RTOL = 1e-12


class DomainError(ValueError):
    pass


class ReachExceededError(ValueError):
    pass


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class SwingKernel:
    """Power-law kernel ``l = k * tau**a`` capped at ``l_max``.

    Parameters
    ----------
    k : float
        Actuation coefficient; grows with swing torque.
    a : float
        Exponent of the power law.
    l_max : float
        Normalized maximum step length.
    """

    k: float
    a: float = DEFAULT_EXPONENT
    l_max: float = math.inf

    def __post_init__(self):
        for name in ("k", "a", "l_max"):
            v = getattr(self, name)
            if not v > 0 or math.isnan(v):
                raise ValueError(f"{name} must be positive, got {v!r}")
        if math.isinf(self.k) or math.isinf(self.a):
            raise ValueError("k and a must be finite")

    @property
    def tau_max(self) -> float:
        if math.isinf(self.l_max):
            return math.inf
        return (self.l_max / self.k) ** (1.0 / self.a)

    def eval(self, tau):
        """Step length reached after swinging for ``tau``."""
        t = np.asarray(tau, dtype=float)
        if np.any(t < 0) or np.any(np.isnan(t)):
            raise DomainError("step time must be non-negative")
        if np.any(t > self.tau_max * (1 + _REACH_RTOL)):
            raise ReachExceededError(
                f"step time exceeds tau_max={self.tau_max:.6g}")
        out = self.k * t ** self.a
        return float(out) if out.ndim == 0 else out

    __call__ = eval

    def inverse(self, length):
        """Swing time needed to cover ``length``."""
        l = np.asarray(length, dtype=float)
        if np.any(l < 0) or np.any(l > self.l_max) or np.any(np.isnan(l)):
            raise DomainError(f"length must lie in [0, {self.l_max:.6g}]")
        out = (l / self.k) ** (1.0 / self.a)
        return float(out) if out.ndim == 0 else out

    def with_k(self, k: float) -> "SwingKernel":
        return SwingKernel(k, self.a, self.l_max)


@dataclass(frozen=True)
class CalibrationFit:
    k: float
    a: float
    r_squared: float
    samples: tuple = field(repr=False, default=())

    def kernel(self, l_max: float = math.inf) -> SwingKernel:
        return SwingKernel(self.k, self.a, l_max)

    def report(self) -> str:
        return f"k={self.k:.17g}\na={self.a:.17g}\nr2={self.r_squared:.17g}\n"


def swing_sim(torque: float, leg_inertia: float, tau_grid,
              dt: float = DEFAULT_DT):
    """Swing a rigid unit-length leg from rest under a constant hip torque.

    The leg is a point-mass foot on a massless rod hinged at the hip, starting
    vertical-down, with gravity pulling it back. In normalized units gravity
    is 1 and the rod length equals the CoM height, so the swing angle obeys
    ``theta'' = torque / leg_inertia - sin(theta)``.

    Returns
    -------
    list of (tau, l)
        ``l`` is the horizontal foot displacement after swinging for ``tau``.
    """
    for name, v in (("torque", torque), ("leg_inertia", leg_inertia)):
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be positive and finite")
    taus = np.asarray(tau_grid, dtype=float)
    if taus.size == 0 or not np.all(np.isfinite(taus)) or np.any(taus <= 0):
        raise ValueError("tau_grid must be non-empty, finite and positive")
    drive = torque / leg_inertia

    def rhs(_t, y):
        return np.array([y[1], drive - math.sin(y[0])])

    # integrate through the sorted grid once, one segment per grid point
    order = np.argsort(taus, kind="stable")
    out = np.empty_like(taus)
    y = np.zeros(2)
    t = 0.0
    for idx in order:
        if taus[idx] > t:
            _, ys = rk4(rhs, y, dt, taus[idx], t0=t)
            y = ys[-1]
            t = taus[idx]
        out[idx] = math.sin(y[0])
    return [(float(tau), float(l)) for tau, l in zip(taus, out)]


def calibrate(samples) -> CalibrationFit:
    """Fit ``l = k * tau**a`` by least squares on ``ln l`` against ``ln tau``."""
    data = [(float(t), float(l)) for t, l in samples]
    valid = np.array([(t, l) for t, l in data
                      if t > 0 and l > 0 and math.isfinite(t)
                      and math.isfinite(l)])
    if len(valid) < 3:
        raise FitError("need at least 3 samples with tau > 0 and l > 0")
    log_t, log_l = np.log(valid[:, 0]), np.log(valid[:, 1])
    if np.ptp(log_t) == 0:
        raise FitError("all step times are equal; slope is undefined")
    fit = stats.linregress(log_t, log_l)
    r2 = min(max(fit.rvalue ** 2, 0.0), 1.0)
    return CalibrationFit(k=math.exp(fit.intercept), a=float(fit.slope),
                          r_squared=float(r2), samples=tuple(data))


def write_samples_csv(path, samples) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau", "l"])
        for t, l in samples:
            w.writerow([f"{t:.17g}", f"{l:.17g}"])


def read_samples_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["tau", "l"]:
            raise ValueError(f"expected header 'tau,l', got {reader.fieldnames}")
        return [(float(r["tau"]), float(r["l"])) for r in reader]
