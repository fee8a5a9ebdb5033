"""Actuation/reach parameter sweeps of the largest resisted push."""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .capturability import DEFAULT_OPTIONS, Regime, SolverOptions, max_disturbance
from .kernel import DEFAULT_EXPONENT, SwingKernel
from .svg import heatmap_svg


def _default_k():
    return tuple(float(v) for v in np.logspace(-1, 1, 20))


def _default_l():
    return tuple(float(v) for v in np.linspace(0.1, 2.0, 20))


@dataclass(frozen=True)
class SweepGrid:
    k_values: tuple = field(default_factory=_default_k)
    l_values: tuple = field(default_factory=_default_l)
    n_max: int = 4
    a: float = DEFAULT_EXPONENT

    def __post_init__(self):
        for name in ("k_values", "l_values"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals or any(not v > 0 for v in vals):
                raise ValueError(f"{name} must be non-empty and positive")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} must be sorted ascending")
            object.__setattr__(self, name, vals)
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if not self.a > 0:
            raise ValueError("a must be positive")


@dataclass(frozen=True)
class SweepCell:
    k: float
    l_max: float
    n: int
    d_max: float
    regime: Regime


@dataclass(frozen=True)
class Increment:
    n_from: int
    n_to: int
    min_pct: float
    max_pct: float
    mean_pct: float


@dataclass
class SweepReport:
    grid: SweepGrid
    cells: list
    increments: list

    def array(self) -> np.ndarray:
        """d_max with shape (len(k_values), len(l_values), n_max)."""
        g = self.grid
        out = np.empty((len(g.k_values), len(g.l_values), g.n_max))
        for i, c in enumerate(self.cells):
            out.flat[i] = c.d_max
        return out

    def monotonicity_violations(self, rtol: float = 1e-9) -> dict:
        """Count decreases of d_max along k, l_max and N beyond ``rtol``."""
        d = self.array()
        out = {}
        for axis, name in enumerate(("k", "l_max", "n")):
            prev = np.take(d, range(d.shape[axis] - 1), axis=axis)
            nxt = np.take(d, range(1, d.shape[axis]), axis=axis)
            out[name] = int(np.sum(nxt < prev - rtol * np.abs(prev)))
        return out

    def write(self, out_dir, svg: bool = False) -> None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "sweep.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "l_max", "n", "d_max", "regime"])
            for c in self.cells:
                w.writerow([f"{c.k:.17g}", f"{c.l_max:.17g}", c.n,
                            f"{c.d_max:.17g}", c.regime.value])
        with open(os.path.join(out_dir, "increments.csv"), "w",
                  newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n_from", "n_to", "min_pct", "max_pct", "mean_pct"])
            for inc in self.increments:
                w.writerow([inc.n_from, inc.n_to, f"{inc.min_pct:.17g}",
                            f"{inc.max_pct:.17g}", f"{inc.mean_pct:.17g}"])
        if svg:
            d = self.array()
            lo, hi = float(d.min()), float(d.max())
            for n in range(self.grid.n_max):
                path = os.path.join(out_dir, f"heatmap_{n + 1}.svg")
                with open(path, "w") as fh:
                    fh.write(heatmap_svg(d[:, :, n], self.grid.l_values,
                                         self.grid.k_values,
                                         title=f"d_max, {n + 1}-step "
                                               "(x: l_max, y: k)",
                                         vmin=lo, vmax=hi))


def increments(d: np.ndarray) -> list:
    """Relative growth of d_max per added step, over all (k, l_max) cells."""
    out = []
    for n in range(d.shape[-1] - 1):
        base = d[..., n]
        ok = base > 0
        pct = 100.0 * (d[..., n + 1][ok] - base[ok]) / base[ok]
        if pct.size == 0:
            continue
        out.append(Increment(n + 1, n + 2, float(pct.min()), float(pct.max()),
                             float(pct.mean())))
    return out


def _row(args):
    k, grid, opts = args
    row = []
    for l_max in grid.l_values:
        kernel = SwingKernel(k, grid.a, l_max)
        for n in range(1, grid.n_max + 1):
            res = max_disturbance(kernel, n, opts)
            row.append(SweepCell(k, l_max, n, res.d, res.regime))
    return row


def run_sweep(grid: SweepGrid = SweepGrid(),
              opts: SolverOptions = DEFAULT_OPTIONS,
              workers: int = 1) -> SweepReport:
    """Largest resisted push for every (k, l_max, N) cell of ``grid``.

    Cells are independent; ``workers > 1`` spreads rows of constant ``k``
    over processes. Output order is always (k, l_max, N).
    """
    jobs = [(k, grid, opts) for k in grid.k_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_row, jobs))
    else:
        rows = [_row(j) for j in jobs]
    cells = [c for row in rows for c in row]
    report = SweepReport(grid, cells, [])
    report.increments = increments(report.array())
    return report
