"""Mixed-integer linear programming: model container, dual simplex, branch-and-bound."""

from .model import MilpModel, ModelBuilder, Row, Sense, Variable, VarKind, dense_model, row_violations
from .simplex import Basis, DualSimplex, LPResult, LPStatus
from .solver import MilpSolution, MilpStatus, SolverConfig, SolveStats, solve_lp, solve_milp

__all__ = [
    "Basis", "DualSimplex", "LPResult", "LPStatus", "MilpModel", "MilpSolution", "MilpStatus",
    "ModelBuilder", "Row", "Sense", "SolveStats", "SolverConfig", "Variable", "VarKind",
    "dense_model", "row_violations", "solve_lp", "solve_milp",
]
