"""Linear models for the carbon-aware and minimum-power schemes.

Per-station power is bilinear: the station pays ``kappa[m, n]`` for user m
only when both ``a[n]`` and ``w[m, n]`` are 1. On binaries
``a * w <= (a + w) / 2``, which gives the linear surrogate

    P~_n = sum_m kappa/2 * w[m, n] + (sum_m kappa/2 + P_s - P_off) * a[n] + P_off

with sums over the users inside station n's disk. ``P~_n >= P_total(n)``
whenever the association is feasible, and the two agree when every covered
user of an ON station is attached to it.
"""

from __future__ import annotations

from dataclasses import replace

from .errors import InvalidDecision, NonIntegralSolution
from .milp import MilpModel, MilpSolution, ModelBuilder, Variable, VarKind
from .power import Decision, PowerParams, RenewableRealization, kappa_value, validate_decision
from .scenario import Scenario


def bilinear_bound_holds(a: int, b: int) -> bool:
    return a * b <= (a + b) / 2


def _kappas(scenario: Scenario, params: PowerParams) -> dict[tuple[int, int], float]:
    return {(m, n): kappa_value(scenario.distance(m, n), params) for m, n in scenario.coverage_pairs()}


def _half_kappa_sum(scenario, kap, n) -> float:
    return sum(kap[m, n] for m in scenario.coverage_bs[n]) / 2.0


def p_tilde_total(scenario: Scenario, params: PowerParams, decision: Decision, n: int) -> float:
    """Linear upper bound on station n's total draw."""
    st = scenario.stations[n]
    kap = {m: kappa_value(scenario.distance(m, n), params) for m in scenario.coverage_bs[n]}
    half = sum(kap.values()) / 2.0
    served = sum(kap[m] / 2.0 for m in scenario.coverage_bs[n] if decision.serving[m] == n)
    return served + (half + st.static_power - st.off_power) * decision.a[n] + st.off_power


def surrogate_nonrenew_total(scenario, params, decision, renew: RenewableRealization) -> float:
    return sum(max(p_tilde_total(scenario, params, decision, n) - renew[n], 0.0) for n in range(scenario.num_stations))


def _association_block(mb: ModelBuilder, scenario: Scenario) -> None:
    """w and a columns plus assignment, capacity and linking rows shared by both models."""
    for m, n in scenario.coverage_pairs():
        mb.add_var(("w", m, n), f"w_{m}_{n}", VarKind.BINARY, 0.0, 1.0)
    for n in range(1, scenario.num_stations):
        mb.add_var(("a", n), f"a_{n}", VarKind.BINARY, 0.0, 1.0)

    for m in range(scenario.num_users):
        mb.add_row(f"assign_{m}", [(mb.col(("w", m, n)), 1.0) for n in scenario.coverage_user[m]], "=", 1.0)
    for n, st in enumerate(scenario.stations):
        mb.add_row(f"cap_{n}", [(mb.col(("w", m, n)), 1.0) for m in scenario.coverage_bs[n]], "<=", float(st.capacity))
    # a_0 == 1 is substituted, so MBS links are implied by the binary bounds.
    for m, n in scenario.coverage_pairs():
        if n == 0:
            continue
        mb.add_row(f"link_{m}_{n}", [(mb.col(("w", m, n)), 1.0), (mb.col(("a", n)), -1.0)], "<=", 0.0)


def _surrogate_terms(mb, scenario, kap, n):
    """Linear part of P~_n as (column, coeff) pairs and its constant."""
    st = scenario.stations[n]
    terms = [(mb.col(("w", m, n)), kap[m, n] / 2.0) for m in scenario.coverage_bs[n]]
    activation = _half_kappa_sum(scenario, kap, n) + st.static_power - st.off_power
    if n == 0:
        return terms, activation + st.off_power
    terms.append((mb.col(("a", n)), activation))
    return terms, st.off_power


def build_p3(scenario: Scenario, params: PowerParams, renew: RenewableRealization) -> MilpModel:
    """Carbon-aware MILP: min sum_n y_n with y_n >= P~_n - renew_n and y_n >= 0."""
    if len(renew) != scenario.num_stations:
        raise ValueError("renewable realization length does not match station count")
    kap = _kappas(scenario, params)
    mb = ModelBuilder("carbon_aware")
    _association_block(mb, scenario)
    caps = []
    for n, st in enumerate(scenario.stations):
        caps.append(2.0 * _half_kappa_sum(scenario, kap, n) + st.static_power + st.off_power)
        j = mb.add_var(("y", n), f"y_{n}", VarKind.CONTINUOUS, 0.0, caps[n])
        mb.add_objective(j, 1.0)
    for n in range(scenario.num_stations):
        terms, const = _surrogate_terms(mb, scenario, kap, n)
        # P~_n never exceeds the cap, so any supply past it changes nothing. Clamping at twice the
        # cap keeps the rhs well scaled while leaving the row strictly slack (a tight one is degenerate).
        r = min(renew[n], 2.0 * caps[n])
        # y_n - sum(coeff * col) >= const - r
        row = [(mb.col(("y", n)), 1.0)] + [(j, -v) for j, v in terms]
        mb.add_row(f"epi_{n}", row, ">=", const - r)
    return mb.build()


def build_min_power(scenario: Scenario, params: PowerParams) -> MilpModel:
    """Minimum total-power MILP: min sum_n P~_n, renewables ignored."""
    kap = _kappas(scenario, params)
    mb = ModelBuilder("min_power")
    _association_block(mb, scenario)
    for n in range(scenario.num_stations):
        terms, const = _surrogate_terms(mb, scenario, kap, n)
        for j, v in terms:
            mb.add_objective(j, v)
        mb.add_constant(const)
    return mb.build()


def decision_from_solution(scenario: Scenario, model: MilpModel, solution: MilpSolution, integrality_tol: float = 1e-6) -> Decision:
    if not solution.optimal or solution.values is None:
        raise InvalidDecision(f"no optimal solution to decode (status {solution.status})")
    x = solution.values

    def binary(key):
        v = float(x[model.var_index[key]])
        r = round(v)
        if r not in (0, 1) or abs(v - r) > integrality_tol:
            raise NonIntegralSolution(f"{key} = {v}")
        return int(r)

    a = [1] + [binary(("a", n)) for n in range(1, scenario.num_stations)]
    serving = []
    for m in range(scenario.num_users):
        on = [n for n in scenario.coverage_user[m] if binary(("w", m, n))]
        if len(on) != 1:
            raise InvalidDecision(f"user {m} served by {len(on)} stations")
        serving.append(on[0])
    decision = Decision(tuple(a), tuple(serving))
    validate_decision(scenario, decision)
    return decision


def fix_decision(model: MilpModel, scenario: Scenario, decision: Decision) -> MilpModel:
    """Copy of ``model`` with every binary pinned to ``decision``."""
    pinned = {}
    for m, n in scenario.coverage_pairs():
        pinned[model.var_index[("w", m, n)]] = float(decision.serving[m] == n)
    for n in range(1, scenario.num_stations):
        pinned[model.var_index[("a", n)]] = float(decision.a[n])
    vs = tuple(
        Variable(v.name, v.kind, pinned[j], pinned[j]) if j in pinned else v for j, v in enumerate(model.variables)
    )
    return replace(model, variables=vs)


def coverage_pair_count(scenario: Scenario) -> int:
    return int(sum(len(c) for c in scenario.coverage_user))

