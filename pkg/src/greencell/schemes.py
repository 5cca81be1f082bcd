"""Association/switching schemes and the exhaustive oracle used to check them."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

from .errors import AssignmentInfeasible, CapacityInfeasible, OracleInfeasible, SolverFailed, TooLarge
from .formulation import build_min_power, build_p3, decision_from_solution
from .milp import MilpSolution, MilpStatus, SolverConfig, solve_milp
from .power import Decision, PowerParams, RenewableRealization, kappa_value, validate_decision
from .scenario import Scenario, User, all_on_assignable, build_scenario

log = logging.getLogger(__name__)

SCHEMES = ("carbon-aware", "minimized-power", "shortest-distance")


@dataclass
class SchemeOutcome:
    decision: Decision
    solution: MilpSolution | None = None

    @property
    def nodes(self) -> int:
        return self.solution.stats.nodes if self.solution else 0

    @property
    def solve_seconds(self) -> float:
        return self.solution.stats.wall_time_s if self.solution else 0.0


def _solve_to_decision(scenario, model, config: SolverConfig) -> SchemeOutcome:
    sol = solve_milp(model, config)
    if sol.status is not MilpStatus.OPTIMAL:
        limited = sol.status in (MilpStatus.NODE_LIMIT, MilpStatus.TIME_LIMIT)
        if not (limited and sol.values is not None):
            raise SolverFailed(sol.status.value, model.name)
        log.warning("%s: %s reached, using incumbent (bound %.6g, objective %.6g)",
                    model.name, sol.status.value, sol.bound, sol.objective)
        sol = MilpSolution(MilpStatus.OPTIMAL, sol.objective, sol.values, sol.bound, sol.stats)
    return SchemeOutcome(decision_from_solution(scenario, model, sol, config.integrality_tol), sol)


def carbon_aware_outcome(scenario, params, renew, solver_config=SolverConfig()) -> SchemeOutcome:
    return _solve_to_decision(scenario, build_p3(scenario, params, renew), solver_config)


def carbon_aware(scenario: Scenario, params: PowerParams, renew: RenewableRealization,
                 solver_config: SolverConfig = SolverConfig()) -> Decision:
    """Switching and association minimising the surrogate non-renewable draw."""
    return carbon_aware_outcome(scenario, params, renew, solver_config).decision


def minimized_power_outcome(scenario, params, solver_config=SolverConfig()) -> SchemeOutcome:
    return _solve_to_decision(scenario, build_min_power(scenario, params), solver_config)


def minimized_power(scenario: Scenario, params: PowerParams, solver_config: SolverConfig = SolverConfig()) -> Decision:
    """Baseline minimising total (renewable + grid) power; blind to renewables."""
    return minimized_power_outcome(scenario, params, solver_config).decision


def shortest_distance(scenario: Scenario, params: PowerParams | None = None) -> Decision:
    """Every station ON, each user on its nearest covering station with room left.

    Users are handled nearest-first (ties by user index); a user whose nearest
    station is full spills to the next-nearest covering one. If that greedy
    pass strands a user, it is repeated with a lookahead that skips any choice
    leaving the remaining users unassignable. Whenever the plain pass succeeds
    the two agree.
    """
    try:
        return _greedy_nearest(scenario, lookahead=False)
    except AssignmentInfeasible:
        if not all_on_assignable(scenario):
            raise
        return _greedy_nearest(scenario, lookahead=True)


def _greedy_nearest(scenario: Scenario, lookahead: bool) -> Decision:
    M, N1 = scenario.num_users, scenario.num_stations
    D = scenario.distances
    prefs = [sorted(scenario.coverage_user[m], key=lambda n: (D[m, n], n)) for m in range(M)]
    order = sorted(range(M), key=lambda m: (D[m, prefs[m][0]], m))
    room = [s.capacity for s in scenario.stations]
    serving = [-1] * M
    for pos, m in enumerate(order):
        for n in prefs[m]:
            if room[n] <= 0:
                continue
            room[n] -= 1
            if lookahead and not _completable(scenario, order[pos + 1:], room):
                room[n] += 1
                continue
            serving[m] = n
            break
        else:
            raise AssignmentInfeasible(f"user {m}: every covering station is full")
    decision = Decision((1,) * N1, tuple(serving))
    validate_decision(scenario, decision)
    return decision


def _completable(scenario: Scenario, users, room) -> bool:
    stations = [replace(s, capacity=max(r, 0)) for s, r in zip(scenario.stations, room)]
    rest = [User(i, scenario.users[m].x, scenario.users[m].y) for i, m in enumerate(users)]
    try:
        return all_on_assignable(build_scenario(stations, rest))
    except CapacityInfeasible:
        return False


def run_scheme(name: str, scenario, params, renew, solver_config=SolverConfig()) -> SchemeOutcome:
    if name == "carbon-aware":
        return carbon_aware_outcome(scenario, params, renew, solver_config)
    if name == "minimized-power":
        return minimized_power_outcome(scenario, params, solver_config)
    if name == "shortest-distance":
        return SchemeOutcome(shortest_distance(scenario, params))
    raise ValueError(f"unknown scheme {name!r}; choose from {SCHEMES}")


def enumeration_size(scenario: Scenario) -> int:
    """Guard value: product of per-user option counts times the number of ON/OFF patterns."""
    size = 2 ** (scenario.num_stations - 1)
    for cov in scenario.coverage_user:
        size *= len(cov)
    return size


def oracle_exact(scenario: Scenario, params: PowerParams, renew: RenewableRealization,
                 objective: str = "p1", budget: int = 10**7) -> tuple[Decision, float]:
    """Exact minimiser of the true ("p1") or surrogate ("p2") objective by enumeration.

    ON/OFF patterns are visited in lexicographic order with the MBS pinned ON;
    for each, users are assigned depth-first to ON covering stations with
    capacity pruning. The first strict improvement wins, so ties resolve
    deterministically.
    """
    if objective not in ("p1", "p2"):
        raise ValueError("objective must be 'p1' or 'p2'")
    size = enumeration_size(scenario)
    if size > budget:
        raise TooLarge(f"enumeration size {size} exceeds budget {budget}")

    M, N1 = scenario.num_users, scenario.num_stations
    st = scenario.stations
    options = [[(n, kappa_value(scenario.distance(m, n), params)) for n in scenario.coverage_user[m]] for m in range(M)]
    half_all = [sum(kappa_value(scenario.distance(m, n), params) for m in scenario.coverage_bs[n]) / 2.0 for n in range(N1)]
    surrogate = objective == "p2"

    best_val = math.inf
    best = None
    ksum = [0.0] * N1
    count = [0] * N1
    serving = [0] * M

    def score(a):
        total = 0.0
        for n in range(N1):
            if surrogate:
                p = ksum[n] / 2.0 + (half_all[n] + st[n].static_power - st[n].off_power) * a[n] + st[n].off_power
            else:
                p = ksum[n] + st[n].static_power if a[n] else st[n].off_power
            total += max(p - renew[n], 0.0)
        return total

    def dfs(m, a, allowed):
        nonlocal best_val, best
        if m == M:
            v = score(a)
            if v < best_val:
                best_val = v
                best = (tuple(a), tuple(serving))
            return
        for n, k in allowed[m]:
            if count[n] >= st[n].capacity:
                continue
            count[n] += 1
            ksum[n] += k
            serving[m] = n
            dfs(m + 1, a, allowed)
            count[n] -= 1
            ksum[n] -= k

    for bits in range(2 ** (N1 - 1)):
        a = [1] + [(bits >> (N1 - 2 - i)) & 1 for i in range(N1 - 1)]
        allowed = [[(n, k) for n, k in options[m] if a[n]] for m in range(M)]
        if any(not opts for opts in allowed):
            continue
        dfs(0, a, allowed)

    if best is None:
        raise OracleInfeasible("no association satisfies coverage and capacity")
    return Decision(*best), best_val
