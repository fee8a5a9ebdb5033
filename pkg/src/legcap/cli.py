"""Batch command line front-end.

Exit codes: 0 on success (or a plan), 1 on usage errors, 2 when the push is
not capturable.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys

import numpy as np

from .capturability import (
    Regime,
    RobotSpec,
    SolverOptions,
    max_disturbance,
    min_actuation,
    plan_steps,
)
from .kernel import (
    DEFAULT_EXPONENT,
    SwingKernel,
    calibrate,
    read_samples_csv,
    swing_sim,
    write_samples_csv,
)
from .lipm import to_dimensionless
from .margin import MarginGraph, bang_bang_target, min_capture_steps
from .sweep import SweepGrid, run_sweep

EXIT_OK, EXIT_USAGE, EXIT_NOT_CAPTURABLE = 0, 1, 2

DEFAULTS = {
    "a": DEFAULT_EXPONENT,
    "k": None,
    "lmax": 1.0,
    "kmax": math.inf,
    "n": None,
    "d": None,
    "out": None,
    "seed": 0,
}

DEFAULT_TORQUES = "0.2,0.4,0.6,0.8,1.0"
DEFAULT_TAU_RANGE = "0.1:1.0:30"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _floats(text, name):
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--{name}: expected comma-separated numbers") from None
    if not vals:
        raise UsageError(f"--{name}: empty list")
    return vals


def _range(text, name, log=False):
    try:
        lo, hi, count = str(text).split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        raise UsageError(f"--{name}: expected MIN:MAX:COUNT") from None
    if count < 1 or lo <= 0 or hi < lo:
        raise UsageError(f"--{name}: need 0 < MIN <= MAX and COUNT >= 1")
    if count == 1:
        return [lo]
    return list(np.logspace(math.log10(lo), math.log10(hi), count) if log
                else np.linspace(lo, hi, count))


def _common(p):
    p.add_argument("--a", type=float, help="kernel exponent")
    p.add_argument("--k", type=float, help="actuation coefficient")
    p.add_argument("--lmax", type=float, help="maximum normalized step length")
    p.add_argument("--kmax", type=float, help="maximum actuation coefficient")
    p.add_argument("--n", type=int, help="number of steps (or step budget)")
    p.add_argument("--d", type=float, help="disturbance (initial ICP offset)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--seed", type=int, help="solver seed")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="legcap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("sweep", help="d_max over a k-l_max grid")
    _common(p)
    p.add_argument("--k-range", help="MIN:MAX:COUNT, log-spaced")
    p.add_argument("--l-range", help="MIN:MAX:COUNT, linear")
    p.add_argument("--svg", action="store_true", help="write heatmap_N.svg")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("plan", help="push-recovery step plan")
    _common(p)
    p.add_argument("--com-height", type=float,
                   help="treat --d and --lmax as meters for this CoM height")

    p = sub.add_parser("maxd", help="largest resisted push for N steps")
    _common(p)

    p = sub.add_parser("mink", help="minimal actuation for a push")
    _common(p)

    p = sub.add_parser("calibrate", help="fit a power-law kernel to swing sims")
    _common(p)
    p.add_argument("--torques", help="comma-separated hip torques")
    p.add_argument("--inertia", type=float, help="leg inertia")
    p.add_argument("--tau-range", help="MIN:MAX:COUNT step-time grid")
    p.add_argument("--samples", help="fit this tau,l CSV instead")

    p = sub.add_parser("graph", help="time-margin capturability graph")
    _common(p)
    p.add_argument("--L", type=float, dest="reach", help="maximum foot reach")
    p.add_argument("--margins", help="comma-separated Delta_1,...,Delta_{N-1}")
    p.add_argument("--du", type=float, help="uniform margin (with --n)")
    p.add_argument("--center", help="ICP position x[,y]")
    p.add_argument("--ankle", help="stance ankle x[,y]")
    p.add_argument("--svg", action="store_true", help="write graph.svg")
    return parser


def _settings(args) -> dict:
    """Merge defaults < config file < command-line flags."""
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        merged.update(read_config(args.config))
    for key, value in vars(args).items():
        if value is not None and key not in ("config", "command"):
            merged[key] = value
    return merged


def _get(cfg, key, cast=float, required=False):
    value = cfg.get(key)
    if value is None:
        if required:
            raise UsageError(f"--{key} is required")
        return None
    try:
        return cast(value)
    except (TypeError, ValueError):
        raise UsageError(f"--{key}: invalid value {value!r}") from None


def _out_dir(cfg):
    out = cfg.get("out")
    if out is None:
        return None
    os.makedirs(out, exist_ok=True)
    return out


def _positive(**kw):
    for name, v in kw.items():
        if v is not None and not v > 0:
            raise UsageError(f"--{name} must be positive")


def cmd_sweep(cfg) -> int:
    a = _get(cfg, "a")
    n = _get(cfg, "n", int) or 4
    kw = {"n_max": n, "a": a}
    if cfg.get("k_range"):
        kw["k_values"] = tuple(_range(cfg["k_range"], "k-range", log=True))
    if cfg.get("l_range"):
        kw["l_values"] = tuple(_range(cfg["l_range"], "l-range"))
    try:
        grid = SweepGrid(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    opts = SolverOptions(seed=_get(cfg, "seed", int))
    report = run_sweep(grid, opts, workers=_get(cfg, "workers", int) or 1)
    report.write(_out_dir(cfg) or ".", svg=bool(cfg.get("svg")))
    print("n_from,n_to,min_pct,max_pct,mean_pct")
    for inc in report.increments:
        print(f"{inc.n_from},{inc.n_to},{inc.min_pct:.4f},{inc.max_pct:.4f},"
              f"{inc.mean_pct:.4f}")
    return EXIT_OK


def _spec(cfg):
    a, lmax, kmax = _get(cfg, "a"), _get(cfg, "lmax"), _get(cfg, "kmax")
    _positive(a=a, lmax=lmax, kmax=kmax)
    return RobotSpec(a, lmax, kmax)


def cmd_plan(cfg) -> int:
    d = _get(cfg, "d", required=True)
    lmax = _get(cfg, "lmax")
    height = _get(cfg, "com_height")
    if height is not None:
        _positive(com_height=height)
        d, lmax = to_dimensionless(height, length=d)[0], lmax / height
        cfg = {**cfg, "lmax": lmax}
    spec = _spec(cfg)
    k = _get(cfg, "k")
    if k is None:
        k = spec.k_max
    if not (k > 0 and math.isfinite(k)):
        raise UsageError("--k (or a finite --kmax) is required and positive")
    n_max = _get(cfg, "n", int) or 2
    if n_max < 1 or d < 0:
        raise UsageError("--n must be >= 1 and --d >= 0")
    plan = plan_steps(spec, k, d, n_max, SolverOptions(seed=_get(cfg, "seed", int)))
    out = _out_dir(cfg)
    if not plan.capturable:
        print("NOT-CAPTURABLE")
        print(f"d={d:.17g}\nN_max={n_max}")
        return EXIT_NOT_CAPTURABLE
    regime = "none" if plan.regime is None else plan.regime.value
    print(f"N={plan.n_steps}\nregime={regime}\n"
          f"k={'' if plan.k is None else format(plan.k, '.17g')}\nd={d:.17g}")
    print("step_index,tau,length,cumulative_time")
    for i, tau, l, t in plan.rows():
        print(f"{i},{tau:.17g},{l:.17g},{t:.17g}")
    if out:
        plan.to_csv(os.path.join(out, "plan.csv"))
    return EXIT_OK


def _print_result(res, extra=""):
    print(res.metadata(), end="")
    if extra:
        print(extra)
    if res.sequence is not None:
        print("taus=" + ",".join(f"{t:.17g}" for t in res.sequence.taus))


def cmd_maxd(cfg) -> int:
    k = _get(cfg, "k", required=True)
    a, lmax = _get(cfg, "a"), _get(cfg, "lmax")
    _positive(k=k, a=a, lmax=lmax)
    n = _get(cfg, "n", int) or 1
    if n < 1:
        raise UsageError("--n must be >= 1")
    res = max_disturbance(SwingKernel(k, a, lmax), n,
                          SolverOptions(seed=_get(cfg, "seed", int)))
    _print_result(res)
    return EXIT_OK if res.regime is not Regime.INFEASIBLE else EXIT_NOT_CAPTURABLE


def cmd_mink(cfg) -> int:
    spec = _spec(cfg)
    d = _get(cfg, "d", required=True)
    _positive(d=d)
    n = _get(cfg, "n", int) or 1
    if n < 1:
        raise UsageError("--n must be >= 1")
    res = min_actuation(spec, d, n, SolverOptions(seed=_get(cfg, "seed", int)))
    _print_result(res)
    return EXIT_OK if res.regime is not Regime.INFEASIBLE else EXIT_NOT_CAPTURABLE


def cmd_calibrate(cfg) -> int:
    out = _out_dir(cfg)
    if cfg.get("samples"):
        try:
            fit = calibrate(read_samples_csv(cfg["samples"]))
        except (OSError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        print(fit.report(), end="")
        return EXIT_OK
    torques = _floats(cfg.get("torques") or DEFAULT_TORQUES, "torques")
    inertia = _get(cfg, "inertia") or 1.0
    _positive(inertia=inertia, **{f"torque{i}": t for i, t in enumerate(torques)})
    taus = _range(cfg.get("tau_range") or DEFAULT_TAU_RANGE, "tau-range")
    rows = []
    for torque in torques:
        samples = swing_sim(torque, inertia, taus)
        fit = calibrate(samples)
        rows.append((torque, fit))
        if out:
            write_samples_csv(os.path.join(out, f"samples_{torque:g}.csv"),
                              samples)
    with open(os.path.join(out or ".", "calibration.csv"), "w",
              newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["torque", "k", "a", "r2"])
        for torque, fit in rows:
            w.writerow([f"{torque:.17g}", f"{fit.k:.17g}", f"{fit.a:.17g}",
                        f"{fit.r_squared:.17g}"])
    print("torque,k,a,r2")
    for torque, fit in rows:
        print(f"{torque:g},{fit.k:.6g},{fit.a:.6g},{fit.r_squared:.6f}")
    return EXIT_OK


def _point(text, name):
    vals = _floats(text, name)
    if len(vals) > 2:
        raise UsageError(f"--{name}: expected x or x,y")
    return vals[0] if len(vals) == 1 else np.array(vals)


def cmd_graph(cfg) -> int:
    if cfg.get("reach") is None and cfg.get("L") is not None:
        cfg = {**cfg, "reach": cfg["L"]}
    L = _get(cfg, "reach")
    if L is None:
        raise UsageError("--L is required")
    _positive(L=L)
    center = _point(cfg["center"], "center") if cfg.get("center") else 0.0
    if cfg.get("margins"):
        margins = _floats(cfg["margins"], "margins")
    elif cfg.get("du") is not None:
        du, n = _get(cfg, "du"), _get(cfg, "n", int, required=True)
        _positive(du=du, n=n)
        margins = [du] * (n - 1)
    else:
        raise UsageError("give --margins or --du with --n")
    try:
        graph = MarginGraph.build(center, L, margins)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = _out_dir(cfg) or "."
    graph.to_csv(os.path.join(out, "radii.csv"))
    ankle = _point(cfg["ankle"], "ankle") if cfg.get("ankle") else None
    if cfg.get("svg"):
        graph.to_svg(os.path.join(out, "graph.svg"), ankle)
    print("n,radius")
    for n, r in enumerate(graph.radii, start=1):
        print(f"{n},{r:.17g}")
    if ankle is not None:
        steps = min_capture_steps(center, ankle, graph)
        if steps is None:
            print("min_steps=none")
            return EXIT_NOT_CAPTURABLE
        target = np.atleast_1d(bang_bang_target(center, ankle, graph))
        print(f"min_steps={steps}")
        print("target=" + ",".join(f"{v:.17g}" for v in target))
    return EXIT_OK


COMMANDS = {
    "sweep": cmd_sweep,
    "plan": cmd_plan,
    "maxd": cmd_maxd,
    "mink": cmd_mink,
    "calibrate": cmd_calibrate,
    "graph": cmd_graph,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _settings(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"legcap {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"legcap {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
