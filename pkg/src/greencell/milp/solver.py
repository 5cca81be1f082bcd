"""LP relaxation and branch-and-bound over binary columns."""

from __future__ import annotations

import heapq
import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import NumericalFailure
from .model import MilpModel, VarKind
from .simplex import Basis, DualSimplex, LPStatus

log = logging.getLogger("greencell.milp")


class MilpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    NODE_LIMIT = "NodeLimit"
    TIME_LIMIT = "TimeLimit"


@dataclass
class SolveStats:
    nodes: int = 0
    simplex_iterations: int = 0
    wall_time_s: float = 0.0


@dataclass
class MilpSolution:
    status: MilpStatus
    objective: float
    values: np.ndarray | None
    bound: float = -math.inf
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def optimal(self) -> bool:
        return self.status is MilpStatus.OPTIMAL


@dataclass(frozen=True)
class SolverConfig:
    feasibility_tol: float = 1e-7
    integrality_tol: float = 1e-6
    gap_tol: float = 0.0
    node_limit: int | None = None
    time_limit_s: float | None = None
    branching: str = "most-fractional"  # or "first-fractional"
    node_order: str = "best-bound"  # or "depth-first"
    backend: str = "bnb"  # or "highs" (scipy.optimize.milp)
    log_every: int = 0

    def __post_init__(self):
        if not (self.feasibility_tol > 0 and self.integrality_tol > 0 and self.gap_tol >= 0):
            raise ValueError("tolerances must be positive")
        if self.node_limit is not None and self.node_limit < 1:
            raise ValueError("node_limit must be >= 1")
        if self.time_limit_s is not None and not self.time_limit_s > 0:
            raise ValueError("time_limit_s must be positive")
        if self.branching not in ("most-fractional", "first-fractional"):
            raise ValueError(f"unknown branching rule {self.branching!r}")
        if self.node_order not in ("best-bound", "depth-first"):
            raise ValueError(f"unknown node order {self.node_order!r}")
        if self.backend not in ("bnb", "highs"):
            raise ValueError(f"unknown backend {self.backend!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "SolverConfig":
        return cls(**data)


def _engine(model: MilpModel, config: SolverConfig) -> DualSimplex:
    A, b, senses = model.dense_rows()
    return DualSimplex(model.objective_vector(), A, senses, b, feas_tol=min(1e-9, config.feasibility_tol / 10))


def solve_lp(model: MilpModel, config: SolverConfig = SolverConfig()) -> MilpSolution:
    """Solve the continuous relaxation (integrality dropped)."""
    t0 = time.perf_counter()
    lp = _engine(model, config)
    lb, ub = model.bounds()
    res = lp.solve(lb, ub)
    stats = SolveStats(1, res.iterations, time.perf_counter() - t0)
    if res.status is LPStatus.INFEASIBLE:
        return MilpSolution(MilpStatus.INFEASIBLE, math.inf, None, math.inf, stats)
    if res.status is LPStatus.UNBOUNDED:
        return MilpSolution(MilpStatus.UNBOUNDED, -math.inf, None, -math.inf, stats)
    obj = model.constant + res.objective
    return MilpSolution(MilpStatus.OPTIMAL, obj, res.x, obj, stats)


def solve_milp(model: MilpModel, config: SolverConfig = SolverConfig()) -> MilpSolution:
    if config.backend == "highs":
        return _solve_highs(model, config)
    return _branch_and_bound(model, config)


def _branch_and_bound(model: MilpModel, config: SolverConfig) -> MilpSolution:
    t0 = time.perf_counter()
    lp = _engine(model, config)
    lb0, ub0 = model.bounds()
    bins = model.binary_cols()
    lb0[bins] = np.maximum(lb0[bins], 0.0)
    ub0[bins] = np.minimum(ub0[bins], 1.0)
    stats = SolveStats()
    depth_first = config.node_order == "depth-first"

    incumbent = None
    inc_obj = math.inf
    seq = 0
    # entries: (bound, seq, lb, ub, warm basis)
    frontier: list = [(-math.inf, seq, lb0, ub0, None)]

    def prune_margin(obj):
        return max(1e-9 * max(1.0, abs(obj)), config.gap_tol * abs(obj))

    status = None
    while frontier:
        if config.node_limit is not None and stats.nodes >= config.node_limit:
            status = MilpStatus.NODE_LIMIT
            break
        if config.time_limit_s is not None and time.perf_counter() - t0 > config.time_limit_s:
            status = MilpStatus.TIME_LIMIT
            break
        if depth_first:
            bound, _, lb, ub, warm = frontier.pop()
        else:
            bound, _, lb, ub, warm = heapq.heappop(frontier)
        if bound >= inc_obj - prune_margin(inc_obj):
            continue

        try:
            res = lp.solve(lb, ub, warm)
        except NumericalFailure:
            if warm is None:
                raise
            log.debug("warm start failed at node %d, re-solving cold", stats.nodes + 1)
            res = lp.solve(lb, ub, None)
        stats.nodes += 1
        stats.simplex_iterations += res.iterations
        if config.log_every and stats.nodes % config.log_every == 0:
            open_bounds = [e[0] for e in frontier]
            log.info("nodes=%d open=%d bound=%.6g incumbent=%.6g", stats.nodes, len(frontier),
                     min(open_bounds + [res.objective]) + model.constant, inc_obj + model.constant)
        if res.status is LPStatus.INFEASIBLE:
            continue
        if res.status is LPStatus.UNBOUNDED:
            if stats.nodes == 1:
                stats.wall_time_s = time.perf_counter() - t0
                return MilpSolution(MilpStatus.UNBOUNDED, -math.inf, None, -math.inf, stats)
            continue
        obj = res.objective
        if obj >= inc_obj - prune_margin(inc_obj):
            continue

        x = res.x
        frac = np.abs(x[bins] - np.round(x[bins]))
        fractional = np.flatnonzero(frac > config.integrality_tol)
        if fractional.size == 0:
            # Snap binaries and recompute the continuous part so rows hold exactly.
            flb, fub = lb.copy(), ub.copy()
            flb[bins] = fub[bins] = np.round(x[bins])
            fixed = lp.solve(flb, fub, res.basis)
            stats.simplex_iterations += fixed.iterations
            if fixed.status is LPStatus.OPTIMAL and fixed.objective < inc_obj:
                incumbent, inc_obj = fixed.x, fixed.objective
            continue

        if config.branching == "most-fractional":
            k = fractional[np.argmax(frac[fractional])]  # argmax returns the lowest index on ties
        else:
            k = fractional[0]
        j = int(bins[k])
        down_ub = ub.copy()
        down_ub[j] = 0.0
        up_lb = lb.copy()
        up_lb[j] = 1.0
        children = [(lb, down_ub), (up_lb, ub)]
        if x[j] >= 0.5:
            children.reverse()  # nearer rounding explored first
        if depth_first:
            children.reverse()  # stack pops last pushed
        for clb, cub in children:
            seq += 1
            entry = (obj, seq, clb, cub, res.basis)
            if depth_first:
                frontier.append(entry)
            else:
                heapq.heappush(frontier, entry)

    stats.wall_time_s = time.perf_counter() - t0
    if status is None:
        if incumbent is None:
            return MilpSolution(MilpStatus.INFEASIBLE, math.inf, None, math.inf, stats)
        obj = model.constant + inc_obj
        return MilpSolution(MilpStatus.OPTIMAL, obj, incumbent, obj, stats)
    open_bound = min((e[0] for e in frontier), default=inc_obj)
    bound = model.constant + min(open_bound, inc_obj)
    obj = model.constant + inc_obj if incumbent is not None else math.inf
    return MilpSolution(status, obj, incumbent, bound, stats)


def _solve_highs(model: MilpModel, config: SolverConfig) -> MilpSolution:
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import csr_matrix

    t0 = time.perf_counter()
    rows, cols, vals = [], [], []
    lo = np.empty(model.num_rows)
    hi = np.empty(model.num_rows)
    for i, r in enumerate(model.rows):
        for j, v in r.coeffs:
            rows.append(i), cols.append(j), vals.append(v)
        s = r.sense.value
        lo[i] = r.rhs if s in ("=", ">=") else -np.inf
        hi[i] = r.rhs if s in ("=", "<=") else np.inf
    A = csr_matrix((vals, (rows, cols)), shape=(model.num_rows, model.num_cols))
    lb, ub = model.bounds()
    integrality = np.array([1 if v.kind is VarKind.BINARY else 0 for v in model.variables])
    options = {"mip_rel_gap": config.gap_tol}
    if config.time_limit_s is not None:
        options["time_limit"] = config.time_limit_s
    if config.node_limit is not None:
        options["node_limit"] = config.node_limit
    constraints = [LinearConstraint(A, lo, hi)] if model.num_rows else []
    res = milp(model.objective_vector(), integrality=integrality, bounds=Bounds(lb, ub),
               constraints=constraints, options=options)
    stats = SolveStats(int(getattr(res, "mip_node_count", 0) or 0), 0, time.perf_counter() - t0)
    if res.status == 0:
        x = np.asarray(res.x, dtype=float)
        x[integrality == 1] = np.round(x[integrality == 1])
        obj = model.evaluate(x)
        bound = model.constant + float(getattr(res, "mip_dual_bound", obj - model.constant) or 0.0)
        return MilpSolution(MilpStatus.OPTIMAL, obj, x, min(bound, obj), stats)
    if res.status == 2:
        return MilpSolution(MilpStatus.INFEASIBLE, math.inf, None, math.inf, stats)
    if res.status == 3:
        return MilpSolution(MilpStatus.UNBOUNDED, -math.inf, None, -math.inf, stats)
    limit = MilpStatus.TIME_LIMIT if config.time_limit_s is not None else MilpStatus.NODE_LIMIT
    x = None if res.x is None else np.asarray(res.x, dtype=float)
    obj = model.evaluate(x) if x is not None else math.inf
    return MilpSolution(limit, obj, x, -math.inf, stats)
