"""N-step capturability with a power-law swing kernel.

The robot stands at the origin when a push puts its ICP at ``d``. It then
takes ``N`` steps; step ``i`` lasts ``tau_i`` and the swing foot travels
``l_i = k * tau_i**a`` from where that same foot last stood. The push is
resisted when the last foot lands exactly on the ICP, which gives

    d_N = sum_i [ sum_{j<=i} (-1)**(i+j) l_j ] * exp(-(tau_1 + ... + tau_i))

Everything below either evaluates that closed form, replays it step by step,
or optimizes over the step times.
"""

from __future__ import annotations

import csv
import enum
import functools
import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .kernel import DEFAULT_EXPONENT, ReachExceededError, SwingKernel
from .lipm import evolve_icp


class Regime(str, enum.Enum):
    STEP_TIME = "StepTime"
    STEP_LENGTH = "StepLength"
    MIXED = "Mixed"
    INFEASIBLE = "Infeasible"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for the multi-start box optimizer.

    ``tau_floor`` is the lower bound on the first step time; zero-time first
    steps are not a valid stepping pattern. ``active_rtol`` decides when a step
    time counts as sitting on its upper bound. ``local`` picks the local
    solver run from every start: ``"lbfgsb"`` (exact gradient) or
    ``"nelder-mead"``.
    """

    n_starts: int = 16
    seed: int = 0
    local: str = "lbfgsb"
    grid_points: int = 64
    grid_budget: int = 200_000
    tau_floor: float = 1e-3
    xatol: float = 1e-10
    fatol: float = 1e-15
    active_rtol: float = 1e-6
    feasibility_samples: int = 10_000


DEFAULT_OPTIONS = SolverOptions()


@dataclass(frozen=True)
class StepSequence:
    taus: tuple

    def __post_init__(self):
        taus = tuple(float(t) for t in np.atleast_1d(self.taus))
        if not taus:
            raise ValueError("a step sequence needs at least one step")
        if any(not math.isfinite(t) or t < 0 for t in taus):
            raise ValueError("step times must be finite and non-negative")
        if taus[0] <= 0:
            raise ValueError("the first step time must be positive")
        object.__setattr__(self, "taus", taus)

    def __len__(self):
        return len(self.taus)

    def lengths(self, kernel: SwingKernel) -> np.ndarray:
        return np.atleast_1d(kernel.eval(np.array(self.taus)))

    def check(self, kernel: SwingKernel) -> None:
        """Raise ReachExceededError if a step is longer than the kernel allows."""
        self.lengths(kernel)


@dataclass(frozen=True)
class RobotSpec:
    a: float = DEFAULT_EXPONENT
    l_max: float = 1.0
    k_max: float = math.inf

    def __post_init__(self):
        for name in ("a", "l_max", "k_max"):
            v = getattr(self, name)
            if not v > 0:
                raise ValueError(f"{name} must be positive, got {v!r}")


@dataclass(frozen=True)
class CapturabilityResult:
    d: float
    sequence: StepSequence | None
    regime: Regime
    objective: float
    k_min: float | None = None
    k: float | None = None

    @property
    def n_steps(self) -> int:
        return 0 if self.sequence is None else len(self.sequence)

    def metadata(self) -> str:
        k_min = "" if self.k_min is None else f"{self.k_min:.17g}"
        return (f"d_max={self.d:.17g}\nregime={self.regime}\n"
                f"k_min={k_min}\nN={self.n_steps}\n")


# ---------------------------------------------------------------- objective

def step_objective(taus, a: float):
    """Closed-form resisted disturbance for a unit actuation coefficient.

    ``taus`` may be a single sequence or an array of shape (M, N); the
    result then has shape (M,).
    """
    x = np.asarray(taus, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    lengths = x ** a
    # inner alternating sum via c_i = l_i - c_{i-1}
    coef = np.empty_like(lengths)
    coef[:, 0] = lengths[:, 0]
    for i in range(1, x.shape[1]):
        coef[:, i] = lengths[:, i] - coef[:, i - 1]
    out = np.sum(coef * np.exp(-np.cumsum(x, axis=1)), axis=1)
    return float(out[0]) if single else out


def _objective_scalar(x, a):
    coef = 0.0
    elapsed = 0.0
    total = 0.0
    for t in x:
        coef = t ** a - coef
        elapsed += t
        total += coef * math.exp(-elapsed)
    return total


def _objective_and_grad(x, a):
    n = len(x)
    decay = []
    coef = []
    c = 0.0
    elapsed = 0.0
    for t in x:
        c = t ** a - c
        elapsed += t
        coef.append(c)
        decay.append(math.exp(-elapsed))
    grad = [0.0] * n
    alt = 0.0    # sum_{i>=m} (-1)**(i-m) e_i
    tail = 0.0   # sum_{i>=m} c_i e_i
    for m in range(n - 1, -1, -1):
        alt = decay[m] - alt
        tail += coef[m] * decay[m]
        t = x[m]
        if t > 0:
            dl = a * t ** (a - 1.0)
        else:
            dl = 0.0 if a > 1 else (1.0 if a == 1 else 1e12)
        grad[m] = dl * alt - tail
    return tail, grad


def disturbance_of_sequence(kernel: SwingKernel, seq: StepSequence) -> float:
    """Initial ICP offset resisted by ``seq`` under ``kernel``."""
    lengths = seq.lengths(kernel)
    taus = np.array(seq.taus)
    total = 0.0
    for i in range(len(taus)):
        inner = sum((-1) ** (i + j) * lengths[j] for j in range(i + 1))
        total += inner * math.exp(-taus[: i + 1].sum())
    return float(total)


def forward_check(kernel: SwingKernel, seq: StepSequence, d: float) -> float:
    """Replay the push step by step and report the miss at capture time.

    The ICP diverges from the current stance ankle for ``tau_i``; then the
    swing foot moves ``l_i`` forward (in the push direction) from its own
    previous spot and becomes the stance foot. Both feet start at the origin.
    Returns ``|x_ic - x_ankle|`` right after the last step; zero means ``d``
    is resisted exactly.
    """
    lengths = seq.lengths(kernel)
    direction = 1.0 if d >= 0 else -1.0
    feet = [0.0, 0.0]
    x_ic = float(d)
    ankle = 0.0
    for i, (tau, l) in enumerate(zip(seq.taus, lengths)):
        x_ic = float(evolve_icp(x_ic, ankle, tau))
        swing = i % 2
        feet[swing] += direction * float(l)
        ankle = feet[swing]
    return abs(x_ic - ankle)


def one_step_analytic(kernel: SwingKernel):
    """Best single step: ``d(tau) = k tau**a e**-tau`` peaks at ``tau = a``."""
    tau = min(kernel.a, kernel.tau_max)
    return tau, kernel.k * tau ** kernel.a * math.exp(-tau)


# ---------------------------------------------------------------- box search

def _bounds(n, upper, opts):
    return [(opts.tau_floor, upper)] + [(0.0, upper)] * (n - 1)


def _grid_candidates(a, n, upper, opts, keep):
    per_axis = opts.grid_points if n <= 3 else max(
        4, int(opts.grid_budget ** (1.0 / n)))
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in _bounds(n, upper, opts)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    vals = step_objective(mesh, a)
    idx = np.argsort(-vals, kind="stable")[:keep]
    return mesh[idx], vals[idx]


def _starts(n, upper, opts):
    bounds = _bounds(n, upper, opts)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    pts = [0.5 * (lo + hi)]
    n_corners = min(2 ** n, opts.n_starts // 2)
    for corner in itertools.islice(itertools.product((1, 0), repeat=n),
                                   n_corners):
        pts.append(np.where(np.array(corner) == 1, hi, lo))
    rng = np.random.default_rng(opts.seed)
    while len(pts) < opts.n_starts:
        pts.append(lo + (hi - lo) * rng.random(n))
    return pts


def _better(v, x, best_v, best_x):
    if best_x is None:
        return True
    scale = max(abs(best_v), 1e-300)
    if v > best_v + 1e-13 * scale:
        return True
    if v >= best_v - 1e-13 * scale:
        return tuple(x) < tuple(best_x)
    return False


def _nelder_mead(a, x0, bounds, opts, tight=1.0):
    res = optimize.minimize(
        lambda x: -_objective_scalar(x.tolist(), a), x0,
        method="Nelder-Mead", bounds=bounds,
        options=dict(xatol=opts.xatol * tight, fatol=opts.fatol * tight,
                     maxiter=2000 * len(x0), adaptive=len(x0) > 2))
    x = np.clip(res.x, [b[0] for b in bounds], [b[1] for b in bounds])
    return _objective_scalar(x.tolist(), a), x


def _lbfgsb(a, x0, bounds, opts):
    def fun(x):
        v, g = _objective_and_grad(x.tolist(), a)
        return -v, -np.asarray(g)

    res = optimize.minimize(fun, x0, jac=True, method="L-BFGS-B",
                            bounds=bounds,
                            options=dict(ftol=1e-16, gtol=1e-13, maxiter=500))
    x = np.clip(res.x, [b[0] for b in bounds], [b[1] for b in bounds])
    return _objective_scalar(x.tolist(), a), x


def _local(a, x0, bounds, opts, tight=1.0):
    if opts.local == "nelder-mead":
        return _nelder_mead(a, x0, bounds, opts, tight)
    if opts.local == "lbfgsb":
        return _lbfgsb(a, x0, bounds, opts)
    raise ValueError(f"unknown local solver {opts.local!r}")


@functools.lru_cache(maxsize=4096)
def _maximize_box(a: float, n: int, upper: float, opts: SolverOptions):
    """Maximize ``step_objective`` over ``[floor, upper] x [0, upper]**(n-1)``."""
    bounds = _bounds(n, upper, opts)
    best_v, best_x = -math.inf, None
    for x0 in _starts(n, upper, opts):
        v, x = _local(a, x0, bounds, opts)
        if _better(v, x, best_v, best_x):
            best_v, best_x = v, x
    # grid polish: a better grid cell means the simplex runs missed a basin
    grid_x, grid_v = _grid_candidates(a, n, upper, opts, keep=4)
    for gx, gv in zip(grid_x, grid_v):
        if gv > best_v - 1e-9 * abs(best_v):
            v, x = _local(a, gx, bounds, opts)
            if _better(v, x, best_v, best_x):
                best_v, best_x = v, x
    v, x = _local(a, best_x, bounds, opts, tight=1e-2)
    if _better(v, x, best_v, best_x):
        best_v, best_x = v, x
    return best_v, tuple(float(t) for t in best_x)


@functools.lru_cache(maxsize=256)
def unconstrained_optimum(a: float, n: int, opts: SolverOptions = DEFAULT_OPTIONS):
    """Global maximizer of the unit-actuation objective with no reach limit.

    Returns ``(value, taus)``. The search box is widened until the answer is
    clear of its upper edge.
    """
    upper = max(20.0, 8.0 * a)
    while True:
        v, x = _maximize_box(a, n, upper, opts)
        if max(x) < 0.9 * upper:
            return v, x
        upper *= 2.0


def _nonnull(taus, tol=1e-9):
    return [i for i, t in enumerate(taus) if i == 0 or t > tol]


def _classify(taus, upper, rtol):
    """Bound activity of each step against a common upper bound.

    Zero-time steps after the first are null steps (the stance just swaps
    back) and take no part in the classification.
    """
    taus = np.asarray(taus)
    keep = _nonnull(taus)
    active = taus[keep] >= upper * (1.0 - rtol)
    if np.all(active):
        return Regime.STEP_LENGTH
    if not np.any(active):
        return Regime.STEP_TIME
    return Regime.MIXED


def max_disturbance(kernel: SwingKernel, n: int,
                    opts: SolverOptions = DEFAULT_OPTIONS) -> CapturabilityResult:
    """Largest push ``kernel`` can resist with ``n`` steps."""
    if n < 1:
        raise ValueError("n must be >= 1")
    upper = kernel.tau_max
    if upper < opts.tau_floor:
        return CapturabilityResult(0.0, None, Regime.INFEASIBLE, 0.0,
                                   k=kernel.k)
    u_val, u_x = unconstrained_optimum(kernel.a, n, opts)
    if max(u_x) <= upper:
        return CapturabilityResult(kernel.k * u_val, StepSequence(u_x),
                                   Regime.STEP_TIME, u_val, k=kernel.k)
    val, x = _maximize_box(kernel.a, n, upper, opts)
    regime = _classify(x, upper, opts.active_rtol)
    if regime is Regime.MIXED:
        v2, x2 = _local(kernel.a, np.array(x), _bounds(n, upper, opts),
                        opts, tight=1e-3)
        if _better(v2, x2, val, x):
            val, x = v2, tuple(float(t) for t in x2)
        regime = _classify(x, upper, opts.active_rtol)
    return CapturabilityResult(kernel.k * val, StepSequence(x), regime, val,
                               k=kernel.k)


# ------------------------------------------------------------ min actuation

def _ratio_slack(taus, a, rho):
    """``rho * f_obj - tau_i**a`` per step; all >= 0 means feasible."""
    x = np.asarray(taus, dtype=float)
    f = step_objective(x, a)
    return rho * f - x ** a, f


def _feasible_points(a, n, rho, upper, opts):
    bounds = _bounds(n, upper, opts)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    rng = np.random.default_rng(opts.seed)
    pts = [lo + (hi - lo) * rng.random((opts.feasibility_samples, n))]
    pts.append(np.array([np.where(np.array(c) == 1, hi, lo)
                         for c in itertools.product((0, 1), repeat=n)]))
    # equal step times: the all-steps-at-full-reach family
    diag = np.linspace(opts.tau_floor, upper, 2001)
    pts.append(np.repeat(diag[:, None], n, axis=1))
    pts = np.vstack(pts)
    f = step_objective(pts, a)
    ok = (f > 0) & np.all(pts ** a <= rho * f[:, None], axis=1)
    return pts[ok], f[ok]


def _slsqp(a, x0, rho, bounds):
    cons = {"type": "ineq",
            "fun": lambda x: _ratio_slack(x, a, rho)[0]}
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", "Values in x were outside bounds")
        res = optimize.minimize(lambda x: -step_objective(x, a), x0,
                                method="SLSQP", bounds=bounds,
                                constraints=[cons],
                                options=dict(ftol=1e-15, maxiter=500))
    x = np.clip(res.x, [b[0] for b in bounds], [b[1] for b in bounds])
    return x


def _interior_feasible(a, n, rho, opts):
    u_val, u_x = unconstrained_optimum(a, n, opts)
    slack, _ = _ratio_slack(u_x, a, rho)
    return bool(np.all(slack >= 0)), u_val, u_x


def min_actuation(spec: RobotSpec, d: float, n: int,
                  opts: SolverOptions = DEFAULT_OPTIONS) -> CapturabilityResult:
    """Smallest actuation coefficient that resists ``d`` with ``n`` steps.

    Maximizes the unit-actuation objective ``f`` subject to
    ``tau_i**a / f <= l_max / d``; then ``k_min = d / f``. The result is
    Infeasible when no sequence meets the reach constraints or when
    ``k_min`` exceeds ``spec.k_max``.
    """
    if not d > 0:
        raise ValueError("disturbance must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    a = spec.a
    rho = spec.l_max / d
    interior, f_best, x_best = _interior_feasible(a, n, rho, opts)
    if interior:
        regime = Regime.STEP_TIME
    else:
        # f never exceeds the unconstrained optimum, which bounds every tau
        upper = (rho * f_best) ** (1.0 / a)
        if upper < opts.tau_floor:
            return CapturabilityResult(d, None, Regime.INFEASIBLE, 0.0)
        pts, vals = _feasible_points(a, n, rho, upper, opts)
        if len(pts) == 0:
            return CapturabilityResult(d, None, Regime.INFEASIBLE, 0.0)
        order = np.argsort(-vals, kind="stable")[:8]
        bounds = _bounds(n, upper, opts)
        best_v, best_x = -math.inf, None
        for x0 in pts[order]:
            x = _slsqp(a, x0, rho, bounds)
            slack, v = _ratio_slack(x, a, rho)
            if np.all(slack >= -1e-12 * rho * abs(v)) and v > 0 and \
                    _better(v, x, best_v, best_x):
                best_v, best_x = v, x
        if best_x is None:
            best_x = pts[order[0]]
            best_v = float(vals[order[0]])
        f_best, x_best = best_v, tuple(float(t) for t in best_x)
        regime = _classify(x_best, (rho * f_best) ** (1.0 / a),
                           opts.active_rtol)
    k_min = d / f_best
    if k_min > spec.k_max * (1 + 1e-12):
        regime = Regime.INFEASIBLE
    return CapturabilityResult(d, StepSequence(x_best), regime, f_best,
                               k_min=k_min, k=k_min)


@functools.lru_cache(maxsize=1024)
def decision_boundary(spec: RobotSpec, n: int,
                      opts: SolverOptions = DEFAULT_OPTIONS,
                      tol: float = 1e-9) -> float:
    """Disturbance at which min-actuation stepping leaves the interior regime.

    Below it the unconstrained optimum is reachable and the steps are timed
    (StepTime); above it at least one step runs at full reach. Found by
    bisection on the min-actuation regime; ``math.inf`` if the regime never
    changes.
    """
    a = spec.a

    def step_time(d):
        return _interior_feasible(a, n, spec.l_max / d, opts)[0]

    lo, hi = spec.l_max, spec.l_max
    while not step_time(lo):
        lo *= 0.5
        if lo < 1e-300:
            return 0.0
    while step_time(hi):
        hi *= 2.0
        if hi > 1e12 * spec.l_max:
            return math.inf
    while hi - lo > tol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if step_time(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ------------------------------------------------------------------ planner

@dataclass(frozen=True)
class StepPlan:
    d: float
    capturable: bool
    regime: Regime | None = None
    taus: tuple = ()
    lengths: tuple = ()
    k: float | None = None
    n_steps_tried: int = 0
    notes: tuple = field(default=(), compare=False)

    @property
    def n_steps(self) -> int:
        return len(self.taus)

    @property
    def sequence(self) -> StepSequence | None:
        return StepSequence(self.taus) if self.taus else None

    def rows(self):
        t = 0.0
        for i, (tau, l) in enumerate(zip(self.taus, self.lengths), start=1):
            t += tau
            yield i, tau, l, t

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step_index", "tau", "length", "cumulative_time"])
            for i, tau, l, t in self.rows():
                w.writerow([i, f"{tau:.17g}", f"{l:.17g}", f"{t:.17g}"])


def _fit_actuation(taus, d, a, l_max, max_iter=60):
    """Pick ``k`` so the sequence resists exactly ``d`` within ``l_max``.

    Steps that would overshoot the reach at that ``k`` are trimmed to it and
    ``k`` is refit; the loop settles in a few passes.
    """
    x = np.array(taus, dtype=float)
    for _ in range(max_iter):
        k = d / step_objective(x, a)
        upper = (l_max / k) ** (1.0 / a)
        if np.all(x <= upper * (1 + 1e-13)):
            return tuple(float(t) for t in np.minimum(x, upper)), k
        x = np.minimum(x, upper)
    return tuple(float(t) for t in x), d / step_objective(x, a)


def plan_steps(spec: RobotSpec, k_available: float, d: float, n_max: int,
               opts: SolverOptions = DEFAULT_OPTIONS,
               atol: float = 1e-9) -> StepPlan:
    """Least-steps, least-actuation push recovery plan.

    For each step count, the push is capturable when ``d`` does not exceed
    the largest push resisted at ``k_available``; the decision boundary then
    selects the timed sequence (unconstrained optimum) or the full-reach one.
    """
    if not (k_available > 0 and n_max >= 1 and d >= 0):
        raise ValueError("k_available, n_max must be positive and d >= 0")
    if d == 0:
        return StepPlan(0.0, True)
    kernel = SwingKernel(k_available, spec.a, spec.l_max)
    capped = RobotSpec(spec.a, spec.l_max, k_available)
    for n in range(1, n_max + 1):
        best = max_disturbance(kernel, n, opts)
        if best.sequence is None or d > best.d + atol:
            continue
        notes = []
        if d < decision_boundary(spec, n, opts):
            _, taus = unconstrained_optimum(spec.a, n, opts)
            regime = Regime.STEP_TIME
        else:
            res = min_actuation(capped, d, n, opts)
            if res.sequence is not None and res.regime is not Regime.INFEASIBLE:
                taus, regime = res.sequence.taus, res.regime
            else:
                # numerically at the capability edge: reuse the max-push shape
                taus, regime = best.sequence.taus, best.regime
                notes.append("edge fallback to max-disturbance sequence")
        taus, k = _fit_actuation(taus, d, spec.a, spec.l_max)
        if k > k_available * (1 + atol):
            taus, k = _fit_actuation(best.sequence.taus, d, spec.a, spec.l_max)
            regime = best.regime
            notes.append("actuation above k_available; used max-push shape")
        lengths = tuple(float(v) for v in np.atleast_1d(
            SwingKernel(k, spec.a, spec.l_max).eval(np.array(taus))))
        return StepPlan(d, True, regime, taus, lengths, k, n, tuple(notes))
    return StepPlan(d, False, n_steps_tried=n_max)


def replay_plan(plan: StepPlan, spec: RobotSpec) -> float:
    """forward_check residual of ``plan`` at its own disturbance."""
    if not plan.taus:
        return abs(plan.d)
    kernel = SwingKernel(plan.k, spec.a, spec.l_max)
    return forward_check(kernel, StepSequence(plan.taus), plan.d)


__all__ = [
    "CapturabilityResult", "Regime", "RobotSpec", "SolverOptions",
    "StepPlan", "StepSequence", "decision_boundary",
    "disturbance_of_sequence", "forward_check", "max_disturbance",
    "min_actuation", "one_step_analytic", "plan_steps", "replay_plan",
    "step_objective", "unconstrained_optimum", "ReachExceededError",
]
