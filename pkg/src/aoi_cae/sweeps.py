"""Parameter sweeps over solved instances, emitted as CSV.

Each cell substitutes swept values into a base instance and runs the exact
SRP solver.  Cells are independent; pass any ``concurrent.futures``
executor to evaluate them in parallel.  Records always come back in
row-major order of the declared axes.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .analysis import lower_bound_value
from .model import SystemInstance, stationary_distribution
from .optimizer import solve_srp
from .simulator import SimConfig, run

METRICS = ("status", "p_ns", "p_sr", "p_sp", "psi", "aoi", "cae", "cost", "ratio")
SIM_METRICS = ("sim_aoi", "sim_cae", "sim_cost", "sim_psi")

# axis name -> dotted instance field
AXIS_FIELDS = {
    "c0": "bounds.c0",
    "d0": "bounds.d0",
    "c_sr": "costs.c_sr",
    "c_sp": "costs.c_sp",
    "c_ns": "costs.c_ns",
    "p01": "source.p01",
    "p10": "source.p10",
    "p_chnl": "channel.p_chnl",
}


@dataclass(frozen=True)
class GridSpec:
    """Inclusive linear grid ``start, ..., stop`` with ``count`` points."""

    axis: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("grid needs at least 2 points")
        if not self.stop > self.start:
            raise ValueError("grid stop must exceed start")
        if self.axis not in AXIS_FIELDS:
            raise ValueError(f"unknown axis '{self.axis}'")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass
class SweepTable:
    axes: tuple[str, ...]
    records: list[dict] = field(default_factory=list)
    grids: tuple[GridSpec, ...] = ()

    @property
    def columns(self) -> tuple[str, ...]:
        cols = self.axes + METRICS
        if self.records and "sim_aoi" in self.records[0]:
            cols += SIM_METRICS
        return cols

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> list:
        return [r[name] for r in self.records]

    def grid(self, name: str) -> np.ndarray:
        """Column reshaped to the grid shape; missing values become NaN."""
        shape = tuple(g.count for g in self.grids)
        vals = [np.nan if r[name] is None else r[name] for r in self.records]
        return np.array(vals, dtype=float).reshape(shape)

    def write_csv(self, fh: IO[str]) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(self.columns)
        for rec in self.records:
            writer.writerow([_fmt(rec[c]) for c in self.columns])


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return format(float(v), ".9g")


def solve_cell(base: SystemInstance, params: dict, sim: SimConfig | None = None) -> dict:
    """Solve one cell; metric fields are ``None`` unless the status is Feasible."""
    inst = base.replace(**{AXIS_FIELDS[k]: v for k, v in params.items()})
    sol = solve_srp(inst)
    rec = dict(params)
    rec.update({m: None for m in METRICS})
    rec["status"] = sol.status.value
    if sim is not None:
        rec.update({m: None for m in SIM_METRICS})
    if not sol.feasible:
        return rec
    pi1 = stationary_distribution(inst.source).pi1
    rec.update(
        p_ns=sol.policy.p_ns,
        p_sr=sol.policy.p_sr,
        p_sp=sol.policy.p_sp,
        psi=sol.psi_star,
        aoi=sol.aoi,
        cae=sol.cae,
        cost=sol.cost,
        ratio=sol.aoi / lower_bound_value(sol.psi_star, inst.weights, pi1),
    )
    if sim is not None:
        res = run(inst, sol.policy, sim)
        rec.update(sim_aoi=res.avg_aoi, sim_cae=res.avg_cae, sim_cost=res.avg_cost, sim_psi=res.empirical_psi)
    return rec


def _evaluate(base, cells: Sequence[dict], executor, sim) -> list[dict]:
    if executor is None:
        return [solve_cell(base, c, sim) for c in cells]
    n = len(cells)
    # Executor.map yields in submission order regardless of completion order
    return list(executor.map(solve_cell, [base] * n, cells, [sim] * n))


def sweep_grid(base: SystemInstance, grids: Sequence[GridSpec], executor=None, simulate: SimConfig | None = None):
    names = tuple(g.axis for g in grids)
    cells = [dict(zip(names, map(float, combo))) for combo in itertools.product(*(g.values() for g in grids))]
    return SweepTable(names, _evaluate(base, cells, executor, simulate), tuple(grids))


def sweep_bounds(base, c0_grid: GridSpec, d0_grid: GridSpec, executor=None, simulate=None) -> SweepTable:
    """Solve over the ``(c0, d0)`` constraint-bound plane."""
    if (c0_grid.axis, d0_grid.axis) != ("c0", "d0"):
        raise ValueError("bounds sweep needs grids on axes 'c0' and 'd0'")
    return sweep_grid(base, (c0_grid, d0_grid), executor, simulate)


def sweep_costs(base, csr_grid: GridSpec, csp_grid: GridSpec, executor=None, simulate=None) -> SweepTable:
    """Solve over the raw/processed transmission-cost plane."""
    if (csr_grid.axis, csp_grid.axis) != ("c_sr", "c_sp"):
        raise ValueError("cost sweep needs grids on axes 'c_sr' and 'c_sp'")
    return sweep_grid(base, (csr_grid, csp_grid), executor, simulate)


def tradeoff_scan(triples, base: SystemInstance, executor=None, simulate=None) -> SweepTable:
    """Optimal (AoI, CAE) point for each ``(p01, p10, p_chnl)`` triple, in input order."""
    cells = [{"p01": float(a), "p10": float(b), "p_chnl": float(c)} for a, b, c in triples]
    return SweepTable(("p01", "p10", "p_chnl"), _evaluate(base, cells, executor, simulate))


DEFAULT_TRADEOFF = tuple(
    (p01, p10, ch)
    for p01, p10 in ((0.35, 0.75), (0.5, 0.5), (0.1, 0.9), (0.9, 0.9))
    for ch in (0.9, 0.7, 0.5, 0.3)
)
