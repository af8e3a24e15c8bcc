"""Grid scans of the entropic Bell statistic over double-transfer angles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .double_transfer import ANGLE_FIELDS, DoubleConfig, JointCounts, pair_tables, sample_double
from .entropy import PAIRS, delta_s
from .errors import DomainError
from .rng import chunks, parallel_map

ANALYTIC_TOL = 1e-6
MC_SIGMAS = 3.0
DEFAULT_STEPS = 101


@dataclass(frozen=True)
class ScanAxis:
    name: str
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if self.name not in ANGLE_FIELDS:
            raise DomainError(f"cannot scan {self.name!r}; choose one of {ANGLE_FIELDS}")
        if int(self.steps) < 2:
            raise DomainError(f"an axis needs at least 2 steps, got {self.steps}")
        object.__setattr__(self, "steps", int(self.steps))

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)

    @property
    def step(self) -> float:
        return (self.stop - self.start) / (self.steps - 1)


@dataclass(frozen=True)
class ScanGrid:
    axes: tuple[ScanAxis, ...]
    base: DoubleConfig = field(default_factory=DoubleConfig)
    mc_n: int = 0
    seed: int = 0
    batches: int = 10

    def __post_init__(self):
        axes = tuple(self.axes)
        if not 1 <= len(axes) <= 2:
            raise DomainError("a scan takes one or two axes")
        if len(axes) == 2 and axes[0].name == axes[1].name:
            raise DomainError("scan axes must be distinct parameters")
        if self.mc_n < 0:
            raise DomainError("mc_n must be >= 0")
        if self.batches < 2:
            raise DomainError("batches must be >= 2")
        object.__setattr__(self, "axes", axes)

    def points(self) -> np.ndarray:
        """``(N, n_axes)`` parameter values, first axis slowest."""
        mesh = np.meshgrid(*[a.values() for a in self.axes], indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def config_at(self, values: Sequence[float]) -> DoubleConfig:
        return replace(self.base, **{a.name: float(v) for a, v in zip(self.axes, values)})


def default_grid(mode: str = "contextual", steps: int = DEFAULT_STEPS, mc_n: int = 0, seed: int = 0) -> ScanGrid:
    """2-D scan of (theta_bA, theta_cA) over [0, pi]^2 with every other angle at 0."""
    axes = (ScanAxis("theta_bA", 0.0, math.pi, steps), ScanAxis("theta_cA", 0.0, math.pi, steps))
    return ScanGrid(axes, DoubleConfig(mode=mode), mc_n=mc_n, seed=seed)


@dataclass(frozen=True)
class ScanResult:
    grid: ScanGrid
    values: np.ndarray
    delta_s_analytic: np.ndarray
    delta_s_mc: np.ndarray
    mc_stderr: np.ndarray
    tol: float = ANALYTIC_TOL

    @property
    def violation(self) -> np.ndarray:
        return self.delta_s_analytic > self.tol

    @property
    def mc_violation(self) -> np.ndarray:
        return self.delta_s_mc > MC_SIGMAS * self.mc_stderr

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.steps for a in self.grid.axes)

    def csv_header(self) -> list[str]:
        return ["param1", "param2", "delta_s_analytic", "delta_s_mc", "violation"]

    def csv_rows(self) -> list[list]:
        rows = []
        two = self.values.shape[1] == 2
        for i in range(self.values.shape[0]):
            rows.append([
                float(self.values[i, 0]),
                float(self.values[i, 1]) if two else "",
                float(self.delta_s_analytic[i]),
                float(self.delta_s_mc[i]) if self.grid.mc_n > 0 else "",
                int(self.violation[i]),
            ])
        return rows


def _batched_delta_s(cfg: DoubleConfig, n: int, batches: int, seed: int, index: int) -> tuple[float, float]:
    sizes = [len(r) for r in chunks(n, -(-n // batches))]
    pooled = {p: np.zeros((2, 2), dtype=np.int64) for p in PAIRS}
    per_batch = []
    for b, size in enumerate(sizes):
        jc = sample_double(cfg, size, seed, key=(index, b))
        for p in PAIRS:
            pooled[p] += jc.counts[p]
        try:
            per_batch.append(delta_s(jc.to_tables()))
        except DomainError:
            pass
    value = delta_s(JointCounts(pooled).to_tables())
    if len(per_batch) >= 2:
        se = float(np.std(per_batch, ddof=1) / math.sqrt(len(per_batch)))
    else:
        se = float("nan")
    return value, se


def scan_delta_s(grid: ScanGrid, threads: int | None = 1, tol: float = ANALYTIC_TOL) -> ScanResult:
    """Evaluate the analytic (and, with ``mc_n > 0``, sampled plug-in) ΔS at every grid point."""
    pts = grid.points()
    N = pts.shape[0]

    def work(block: range):
        out = []
        for i in block:
            cfg = grid.config_at(pts[i])
            ana = delta_s(pair_tables(cfg))
            if grid.mc_n > 0:
                mc, se = _batched_delta_s(cfg, grid.mc_n, grid.batches, grid.seed, i)
            else:
                mc, se = float("nan"), float("nan")
            out.append((ana, mc, se))
        return out

    size = 64 if grid.mc_n == 0 else 4
    parts = parallel_map(work, chunks(N, size), threads)
    flat = np.array([r for part in parts for r in part], dtype=float).reshape(N, 3)
    return ScanResult(grid, pts, flat[:, 0], flat[:, 1], flat[:, 2], tol)


@dataclass(frozen=True)
class ViolationSummary:
    count: int
    max_delta_s: float
    argmax: dict

    def to_dict(self) -> dict:
        return {"count": self.count, "max_delta_s": self.max_delta_s, "argmax": self.argmax}


def find_violations(result: ScanResult, tol: float | None = None, use_mc: bool = False) -> ViolationSummary:
    """Count points with ΔS above ``tol`` (analytic) or above 3 standard errors (Monte Carlo)."""
    if use_mc:
        if result.grid.mc_n == 0:
            raise DomainError("scan has no Monte Carlo values")
        values = result.delta_s_mc
        flags = result.mc_violation
    else:
        values = result.delta_s_analytic
        flags = values > (result.tol if tol is None else tol)
    i = int(np.nanargmax(values))
    argmax = {a.name: float(result.values[i, k]) for k, a in enumerate(result.grid.axes)}
    return ViolationSummary(int(np.count_nonzero(flags)), float(values[i]), argmax)
