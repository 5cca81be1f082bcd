"""Bounded-variable dual simplex on a dense tableau.

Every row ``i`` gets a slack ``s_i`` with coefficient +1, so ``A x + s = b``
and the slack bounds encode the relation (``<=``: s >= 0, ``>=``: s <= 0,
``=``: s == 0). The slack basis is always available, and with nonbasic
columns parked at the bound matching the sign of their reduced cost it is
dual feasible. That lets one algorithm handle cold starts and the
bound-change reoptimisation used by branch-and-bound.

Columns whose cost sign needs an infinite bound get a temporary box at
``±ARTIFICIAL_BOUND``, widened to dwarf the instance's own data; if the
optimum still rests on such a box the LP is reported unbounded.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import NumericalFailure

ARTIFICIAL_BOUND = 1e9


class LPStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass
class Basis:
    """Warm-start data: basic column per row and which nonbasic columns sit at their upper bound."""

    basic: np.ndarray
    at_upper: np.ndarray


@dataclass
class LPResult:
    status: LPStatus
    x: np.ndarray | None
    objective: float
    basis: Basis | None
    iterations: int


class DualSimplex:
    def __init__(self, c, A, senses, b, feas_tol: float = 1e-9, dual_tol: float = 1e-9,
                 pivot_tol: float = 1e-9, refactor_every: int = 50):
        A = np.asarray(A, dtype=float)
        self.m, self.n = A.shape
        m, n = self.m, self.n
        self.A_full = np.hstack([A, np.eye(m)])
        self.b = np.asarray(b, dtype=float).copy()
        self.cost = np.concatenate([np.asarray(c, dtype=float), np.zeros(m)])
        slack_lb = np.zeros(m)
        slack_ub = np.zeros(m)
        for i, s in enumerate(senses):
            s = getattr(s, "value", s)
            if s == "<=":
                slack_ub[i] = np.inf
            elif s == ">=":
                slack_lb[i] = -np.inf
            elif s != "=":
                raise ValueError(f"unknown row sense {s!r}")
        self.slack_lb, self.slack_ub = slack_lb, slack_ub
        self.feas_tol = feas_tol
        self.loose_tol = max(1e-7, 100 * feas_tol)
        self.dual_tol = dual_tol
        self.pivot_tol = pivot_tol
        self.refactor_every = refactor_every
        self.max_iter = 50 * (m + n) + 1000
        self.data_scale = float(np.abs(self.b).max(initial=0.0))
        self.big = ARTIFICIAL_BOUND

    # -- helpers ------------------------------------------------------------

    def _refactor(self, basic):
        B = self.A_full[:, basic]
        try:
            lu = np.linalg.solve(B, np.column_stack([self.A_full, self.b]))
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"singular basis: {exc}") from None
        T, Tb = lu[:, :-1], lu[:, -1]
        d = self.cost - self.cost[basic] @ T
        d[basic] = 0.0
        return T, Tb, d

    def _park(self, j, d_j, L, U, at_upper, artificial):
        """Put nonbasic column j on the bound its reduced cost asks for."""
        if L[j] == U[j]:
            at_upper[j] = False
        elif d_j < -self.dual_tol:
            if np.isinf(U[j]):
                U[j] = self.big
                artificial[j] = True
            at_upper[j] = True
        elif d_j > self.dual_tol:
            if np.isinf(L[j]):
                L[j] = -self.big
                artificial[j] = True
            at_upper[j] = False
        else:
            if np.isinf(L[j]) and np.isinf(U[j]):
                L[j] = -self.big
                artificial[j] = True
                at_upper[j] = False
            elif np.isinf(L[j]):
                at_upper[j] = True
            elif np.isinf(U[j]):
                at_upper[j] = False

    # -- main entry ---------------------------------------------------------

    def solve(self, lb, ub, warm: Basis | None = None) -> LPResult:
        m, n = self.m, self.n
        ntot = n + m
        L = np.concatenate([np.asarray(lb, dtype=float), self.slack_lb])
        U = np.concatenate([np.asarray(ub, dtype=float), self.slack_ub])
        if np.any(L > U):
            return LPResult(LPStatus.INFEASIBLE, None, np.inf, None, 0)
        artificial = np.zeros(ntot, dtype=bool)
        finite = np.abs(np.concatenate([L[np.isfinite(L)], U[np.isfinite(U)]]))
        self.big = max(ARTIFICIAL_BOUND, 1e4 * max(self.data_scale, finite.max(initial=0.0)))

        if warm is None:
            basic = np.arange(n, ntot)
            at_upper = np.zeros(ntot, dtype=bool)
        else:
            basic = warm.basic.copy()
            at_upper = warm.at_upper.copy()

        T, Tb, d = self._refactor(basic)
        is_basic = np.zeros(ntot, dtype=bool)
        is_basic[basic] = True
        for j in np.flatnonzero(~is_basic):
            # A warm status stays unless its bound vanished or the cost sign disagrees.
            keep = warm is not None and (
                (at_upper[j] and np.isfinite(U[j]) and d[j] <= self.dual_tol)
                or (not at_upper[j] and np.isfinite(L[j]) and d[j] >= -self.dual_tol)
            )
            if not keep:
                self._park(j, d[j], L, U, at_upper, artificial)
        at_upper[basic] = False

        iters = 0
        since_refactor = 0
        stall = 0
        best_obj = -np.inf
        bland = False
        tolerated: set[int] = set()
        while True:
            if iters > self.max_iter:
                raise NumericalFailure(f"dual simplex exceeded {self.max_iter} iterations")
            x_nb = np.where(at_upper, U, L)
            x_nb[basic] = 0.0
            xB = Tb - T @ x_nb

            below = L[basic] - xB
            above = xB - U[basic]
            mag = 1.0 + np.minimum(np.abs(np.where(below > above, L[basic], U[basic])), self.big)
            viol = np.maximum(below, above) / mag
            if tolerated:
                viol[list(tolerated)] = 0.0
            if bland:
                cand = np.flatnonzero(viol > self.feas_tol)
                r = int(cand[np.argmin(basic[cand])]) if cand.size else -1
            else:
                r = int(np.argmax(viol)) if m else -1
                if r >= 0 and viol[r] <= self.feas_tol:
                    r = -1

            if r < 0:
                # Primal feasible; confirm on a fresh factorisation before declaring optimality.
                if since_refactor:
                    T, Tb, d = self._refactor(basic)
                    since_refactor = 0
                    if self._fix_dual(d, basic, L, U, at_upper, artificial):
                        continue
                    x_nb = np.where(at_upper, U, L)
                    x_nb[basic] = 0.0
                    xB = Tb - T @ x_nb
                    if self._max_violation(xB, basic, L, U, tolerated) > self.feas_tol:
                        continue
                break

            alpha = T[r]
            going_up = below[r] > above[r]
            elig = ~is_basic & (L != U)
            # pivot tolerance relative to the row's magnitude
            scale = max(1.0, float(np.abs(alpha[elig]).max(initial=0.0)))
            ptol = self.pivot_tol * scale
            if going_up:
                mask = elig & (((~at_upper) & (alpha < -ptol)) | (at_upper & (alpha > ptol)))
            else:
                mask = elig & (((~at_upper) & (alpha > ptol)) | (at_upper & (alpha < -ptol)))
            cols = np.flatnonzero(mask)
            if cols.size == 0:
                if since_refactor:
                    T, Tb, d = self._refactor(basic)
                    since_refactor = 0
                    continue
                if viol[r] <= self.loose_tol:
                    # residue at rounding level with nothing to pivot on
                    tolerated.add(r)
                    continue
                return LPResult(LPStatus.INFEASIBLE, None, np.inf, None, iters)

            a_abs = np.abs(alpha[cols])
            d_abs = np.abs(d[cols])
            if bland:
                ratios = d_abs / a_abs
                theta = ratios.min()
                q = int(cols[np.flatnonzero(ratios <= theta + 1e-12)][0])
            else:
                # Harris two-pass: widest step within tolerance, then the largest pivot.
                theta_max = ((d_abs + self.dual_tol) / a_abs).min()
                ok = (d_abs / a_abs) <= theta_max
                best = np.flatnonzero(ok)
                q = int(cols[best[np.argmax(a_abs[best])]])

            if abs(alpha[q]) < 1e-7 * scale and since_refactor:
                # small pivot on a drifted tableau: recompute before trusting it
                T, Tb, d = self._refactor(basic)
                since_refactor = 0
                self._fix_dual(d, basic, L, U, at_upper, artificial)
                continue

            leaving = basic[r]
            piv = T[r, q]
            T[r] /= piv
            Tb[r] /= piv
            col = T[:, q].copy()
            col[r] = 0.0
            T -= np.outer(col, T[r])
            Tb -= col * Tb[r]
            d = d - d[q] * T[r]
            d[q] = 0.0
            basic[r] = q
            tolerated.clear()
            is_basic[q] = True
            is_basic[leaving] = False
            at_upper[q] = False
            # leaving column rests on the bound it violated
            at_upper[leaving] = not going_up
            iters += 1
            since_refactor += 1
            if since_refactor >= self.refactor_every:
                T, Tb, d = self._refactor(basic)
                since_refactor = 0
                self._fix_dual(d, basic, L, U, at_upper, artificial)

            obj = self._objective(T, Tb, basic, at_upper, L, U)
            if obj > best_obj + 1e-12 * max(1.0, abs(best_obj)):
                best_obj = obj
                stall = 0
            else:
                stall += 1
                if stall > 50:
                    bland = True

        x = np.where(at_upper, U, L)
        x_nb = x.copy()
        x_nb[basic] = 0.0
        x[basic] = Tb - T @ x_nb
        if np.any(artificial & (np.abs(x) >= self.big * (1 - 1e-9))):
            return LPResult(LPStatus.UNBOUNDED, None, -np.inf, None, iters)
        obj = float(self.cost[:n] @ x[:n])
        return LPResult(LPStatus.OPTIMAL, x[:n].copy(), obj, Basis(basic.copy(), at_upper.copy()), iters)

    def _max_violation(self, xB, basic, L, U, tolerated) -> float:
        below = L[basic] - xB
        above = xB - U[basic]
        mag = 1.0 + np.minimum(np.abs(np.where(below > above, L[basic], U[basic])), self.big)
        viol = np.maximum(below, above) / mag
        if tolerated:
            viol[list(tolerated)] = 0.0
        return float(viol.max(initial=-np.inf))

    def _objective(self, T, Tb, basic, at_upper, L, U) -> float:
        x = np.where(at_upper, U, L)
        x_nb = x.copy()
        x_nb[basic] = 0.0
        x[basic] = Tb - T @ x_nb
        return float(self.cost @ x)

    def _fix_dual(self, d, basic, L, U, at_upper, artificial) -> bool:
        """Repair reduced-cost sign drift by moving columns to the matching bound."""
        nb = np.ones(len(d), dtype=bool)
        nb[basic] = False
        bad = nb & (L != U) & (((~at_upper) & (d < -self.dual_tol)) | (at_upper & (d > self.dual_tol)))
        for j in np.flatnonzero(bad):
            self._park(j, d[j], L, U, at_upper, artificial)
        return bool(bad.any())
