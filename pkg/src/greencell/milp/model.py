"""Sparse linear model with binary and continuous columns."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class VarKind(str, Enum):
    BINARY = "binary"
    CONTINUOUS = "continuous"


class Sense(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


@dataclass(frozen=True)
class Variable:
    name: str
    kind: VarKind
    lb: float
    ub: float


@dataclass(frozen=True)
class Row:
    name: str
    coeffs: tuple[tuple[int, float], ...]
    sense: Sense
    rhs: float


@dataclass(frozen=True)
class MilpModel:
    """Minimisation model ``min c.x + constant`` over sparse rows.

    ``var_index`` maps keys such as ``("w", m, n)`` to column numbers.
    """

    variables: tuple[Variable, ...]
    objective: tuple[tuple[int, float], ...]
    constant: float
    rows: tuple[Row, ...]
    var_index: dict = field(default_factory=dict, compare=False)
    name: str = "model"

    @property
    def num_cols(self) -> int:
        return len(self.variables)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def binary_cols(self) -> np.ndarray:
        return np.array([j for j, v in enumerate(self.variables) if v.kind is VarKind.BINARY], dtype=int)

    def objective_vector(self) -> np.ndarray:
        c = np.zeros(self.num_cols)
        for j, v in self.objective:
            c[j] += v
        return c

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lb = np.array([v.lb for v in self.variables], dtype=float)
        ub = np.array([v.ub for v in self.variables], dtype=float)
        return lb, ub

    def dense_rows(self) -> tuple[np.ndarray, np.ndarray, list[Sense]]:
        A = np.zeros((self.num_rows, self.num_cols))
        for i, row in enumerate(self.rows):
            for j, v in row.coeffs:
                A[i, j] += v
        b = np.array([r.rhs for r in self.rows], dtype=float)
        return A, b, [r.sense for r in self.rows]

    def evaluate(self, x) -> float:
        return float(self.constant + sum(v * x[j] for j, v in self.objective))

    def relaxed(self) -> "MilpModel":
        vs = tuple(Variable(v.name, VarKind.CONTINUOUS, v.lb, v.ub) for v in self.variables)
        return MilpModel(vs, self.objective, self.constant, self.rows, self.var_index, self.name + "_relaxed")

    def to_lp_text(self) -> str:
        """CPLEX-LP style dump; the constant goes into a fixed helper column."""
        names = [v.name for v in self.variables]

        def expr(coeffs):
            parts = []
            for j, v in coeffs:
                if v == 0:
                    continue
                sign = "-" if v < 0 else "+"
                parts.append(f"{sign} {_num(abs(v))} {names[j]}")
            if not parts:
                return "0 " + (names[0] if names else "__const")
            s = " ".join(parts)
            return s[2:] if s.startswith("+ ") else s

        lines = [f"\\ {self.name}", "Minimize", " obj: " + expr(self.objective)]
        if self.constant:
            lines[-1] += f" + {_num(self.constant)} __const" if self.constant > 0 else f" - {_num(-self.constant)} __const"
        lines.append("Subject To")
        for r in self.rows:
            lines.append(f" {r.name}: {expr(r.coeffs)} {r.sense.value} {_num(r.rhs)}")
        lines.append("Bounds")
        for v in self.variables:
            if v.kind is VarKind.BINARY and v.lb == 0 and v.ub == 1:
                continue
            lo = "-inf" if math.isinf(v.lb) else _num(v.lb)
            hi = "+inf" if math.isinf(v.ub) else _num(v.ub)
            lines.append(f" {lo} <= {v.name} <= {hi}")
        if self.constant:
            lines.append(" __const = 1")
        bins = [v.name for v in self.variables if v.kind is VarKind.BINARY]
        if bins:
            lines.append("Binaries")
            for k in range(0, len(bins), 8):
                lines.append(" " + " ".join(bins[k : k + 8]))
        lines.append("End")
        return "\n".join(lines) + "\n"


def _num(x: float) -> str:
    return repr(float(x))


class ModelBuilder:
    def __init__(self, name: str = "model"):
        self.name = name
        self._vars: list[Variable] = []
        self._index: dict = {}
        self._obj: dict[int, float] = {}
        self._constant = 0.0
        self._rows: list[Row] = []

    def add_var(self, key, name: str, kind: VarKind = VarKind.CONTINUOUS, lb: float = 0.0, ub: float = math.inf) -> int:
        if key in self._index:
            raise KeyError(f"duplicate variable key {key!r}")
        if lb > ub:
            raise ValueError(f"{name}: lower bound above upper bound")
        j = len(self._vars)
        self._vars.append(Variable(name, VarKind(kind), float(lb), float(ub)))
        self._index[key] = j
        return j

    def col(self, key) -> int:
        return self._index[key]

    def add_objective(self, j: int, coeff: float) -> None:
        self._obj[j] = self._obj.get(j, 0.0) + float(coeff)

    def add_constant(self, value: float) -> None:
        self._constant += float(value)

    def add_row(self, name: str, coeffs, sense, rhs: float) -> int:
        merged: dict[int, float] = {}
        for j, v in coeffs:
            if not 0 <= j < len(self._vars):
                raise IndexError(f"row {name} references unknown column {j}")
            merged[j] = merged.get(j, 0.0) + float(v)
        self._rows.append(Row(name, tuple(merged.items()), Sense(sense), float(rhs)))
        return len(self._rows) - 1

    def build(self) -> MilpModel:
        obj = tuple(sorted(self._obj.items()))
        return MilpModel(tuple(self._vars), obj, self._constant, tuple(self._rows), dict(self._index), self.name)


def dense_model(c, A, senses, b, lb, ub, binary, constant: float = 0.0, name: str = "model") -> MilpModel:
    """Convenience constructor from dense arrays (used by tests and small scripts)."""
    mb = ModelBuilder(name)
    for j in range(len(c)):
        kind = VarKind.BINARY if binary[j] else VarKind.CONTINUOUS
        mb.add_var(j, f"x{j}", kind, lb[j], ub[j])
        if c[j]:
            mb.add_objective(j, c[j])
    mb.add_constant(constant)
    for i, row in enumerate(np.asarray(A, dtype=float)):
        mb.add_row(f"r{i}", [(j, v) for j, v in enumerate(row) if v != 0], senses[i], b[i])
    return mb.build()


def row_violations(model: MilpModel, x, tol: float = 1e-7) -> list[str]:
    """Independent feasibility pass over rows, bounds and integrality."""
    bad = []
    for r in model.rows:
        lhs = math.fsum(v * float(x[j]) for j, v in r.coeffs)
        if r.sense is Sense.LE and lhs > r.rhs + tol:
            bad.append(f"{r.name}: {lhs} > {r.rhs}")
        elif r.sense is Sense.GE and lhs < r.rhs - tol:
            bad.append(f"{r.name}: {lhs} < {r.rhs}")
        elif r.sense is Sense.EQ and abs(lhs - r.rhs) > tol:
            bad.append(f"{r.name}: {lhs} != {r.rhs}")
    for j, v in enumerate(model.variables):
        xj = float(x[j])
        if xj < v.lb - tol or xj > v.ub + tol:
            bad.append(f"{v.name}: {xj} outside [{v.lb}, {v.ub}]")
        if v.kind is VarKind.BINARY and min(abs(xj), abs(xj - 1)) > tol:
            bad.append(f"{v.name}: {xj} not binary")
    return bad
