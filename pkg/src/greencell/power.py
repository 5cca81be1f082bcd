"""Base-station power model, wind generation, and the exact non-renewable objective."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GreencellError, InvalidDecision, NotInCoverage
from .scenario import Scenario


@dataclass(frozen=True)
class PowerParams:
    kappa_coeff: float = 18.0  # W per km**exponent
    kappa_exponent: float = 2.6
    air_density: float = 1.225  # kg/m^3

    def __post_init__(self):
        if self.kappa_coeff < 0 or not self.kappa_exponent > 0 or not self.air_density > 0:
            raise ValueError(f"invalid power parameters: {self}")


@dataclass(frozen=True)
class WindModel:
    weibull_shape: float = 2.081
    weibull_scale: float = 6.69  # m/s

    def __post_init__(self):
        if not (self.weibull_shape > 0 and self.weibull_scale > 0):
            raise ValueError("Weibull shape and scale must be positive")


@dataclass(frozen=True)
class RenewableRealization:
    p_renew: tuple[float, ...]

    def __post_init__(self):
        if any(not (p >= 0) for p in self.p_renew):
            raise ValueError("renewable power must be non-negative")

    @classmethod
    def zeros(cls, n: int) -> "RenewableRealization":
        return cls((0.0,) * n)

    def __len__(self):
        return len(self.p_renew)

    def __getitem__(self, n):
        return self.p_renew[n]

    def to_dict(self) -> dict:
        return {"p_renew_w": list(self.p_renew)}

    @classmethod
    def from_dict(cls, data: dict) -> "RenewableRealization":
        try:
            return cls(tuple(float(p) for p in data["p_renew_w"]))
        except (KeyError, TypeError) as exc:
            raise GreencellError(f"renewables JSON needs 'p_renew_w': {exc}") from None


def load_renewables(path) -> RenewableRealization:
    with open(path) as fh:
        return RenewableRealization.from_dict(json.load(fh))


def save_renewables(renew: RenewableRealization, path) -> None:
    Path(path).write_text(json.dumps(renew.to_dict()) + "\n")


@dataclass(frozen=True)
class Decision:
    """ON/OFF modes ``a`` and a serving station per user.

    ``serving[m]`` is the single station with ``w[m, n] = 1``; every other
    association indicator is zero, so this is the sparse form of ``w``.
    """

    a: tuple[int, ...]
    serving: tuple[int, ...]

    def w(self, m: int, n: int) -> int:
        return int(self.serving[m] == n)

    def w_matrix(self, num_stations: int) -> np.ndarray:
        out = np.zeros((len(self.serving), num_stations), dtype=int)
        out[np.arange(len(self.serving)), list(self.serving)] = 1
        return out

    def load(self, n: int) -> int:
        return sum(1 for s in self.serving if s == n)

    def to_dict(self) -> dict:
        return {"a": list(self.a), "assignments": [{"user": m, "bs": n} for m, n in enumerate(self.serving)]}

    @classmethod
    def from_dict(cls, data: dict) -> "Decision":
        pairs = sorted((int(e["user"]), int(e["bs"])) for e in data["assignments"])
        if [m for m, _ in pairs] != list(range(len(pairs))):
            raise InvalidDecision("assignments must list every user exactly once")
        return cls(tuple(int(x) for x in data["a"]), tuple(n for _, n in pairs))


def validate_decision(scenario: Scenario, decision: Decision) -> None:
    """Raise :class:`InvalidDecision` unless every association/mode constraint holds."""
    N1, M = scenario.num_stations, scenario.num_users
    if len(decision.a) != N1 or len(decision.serving) != M:
        raise InvalidDecision("decision shape does not match scenario")
    if any(x not in (0, 1) for x in decision.a):
        raise InvalidDecision("modes must be 0/1")
    if decision.a[0] != 1:
        raise InvalidDecision("the MBS must stay ON")
    counts = [0] * N1
    for m, n in enumerate(decision.serving):
        if not 0 <= n < N1 or n not in scenario.coverage_user[m]:
            raise InvalidDecision(f"user {m} assigned to non-covering station {n}")
        if not decision.a[n]:
            raise InvalidDecision(f"user {m} assigned to OFF station {n}")
        counts[n] += 1
    for n, s in enumerate(scenario.stations):
        if counts[n] > s.capacity:
            raise InvalidDecision(f"station {n} serves {counts[n]} > capacity {s.capacity}")


def kappa_value(distance_m: float, params: PowerParams) -> float:
    # The radiated-power law is calibrated on kilometres.
    return params.kappa_coeff * (distance_m / 1000.0) ** params.kappa_exponent


def kappa(scenario: Scenario, params: PowerParams, m: int, n: int) -> float:
    if not scenario.covers(m, n):
        raise NotInCoverage(f"user {m} is outside station {n}'s coverage")
    return kappa_value(scenario.distance(m, n), params)


def kappa_matrix(scenario: Scenario, params: PowerParams) -> np.ndarray:
    """kappa for every (user, station); NaN outside coverage."""
    k = params.kappa_coeff * (scenario.distances / 1000.0) ** params.kappa_exponent
    mask = np.zeros_like(k, dtype=bool)
    for m, cov in enumerate(scenario.coverage_user):
        mask[m, list(cov)] = True
    return np.where(mask, k, np.nan)


def p_on(scenario: Scenario, params: PowerParams, decision: Decision, n: int) -> float:
    radiated = sum(kappa(scenario, params, m, n) for m in scenario.coverage_bs[n] if decision.serving[m] == n)
    return radiated + scenario.stations[n].static_power


def p_total(scenario: Scenario, params: PowerParams, decision: Decision, n: int) -> float:
    if decision.a[n]:
        return p_on(scenario, params, decision, n)
    return scenario.stations[n].off_power


def p_nonrenew(scenario, params, decision, renew: RenewableRealization, n: int) -> float:
    return max(p_total(scenario, params, decision, n) - renew[n], 0.0)


def p_nonrenew_total(scenario: Scenario, params: PowerParams, decision: Decision, renew: RenewableRealization) -> float:
    """Exact non-renewable draw summed over stations; surplus renewables are never shared."""
    return sum(p_nonrenew(scenario, params, decision, renew, n) for n in range(scenario.num_stations))


def sample_wind_speeds(wind: WindModel, count: int, rng_seed) -> np.ndarray:
    """Independent Weibull speeds via inverse CDF, one per station."""
    rng = np.random.default_rng([rng_seed, 0x57494E44])
    u = rng.random(count)
    return wind.weibull_scale * (-np.log1p(-u)) ** (1.0 / wind.weibull_shape)


def wind_power(speed: float, turbine_radius: float, air_density: float) -> float:
    area = math.pi * turbine_radius**2
    return 0.5 * air_density * area * speed**3


def renewables_from_speeds(speeds, turbine_radii, air_density: float) -> RenewableRealization:
    return RenewableRealization(tuple(float(wind_power(v, l, air_density)) for v, l in zip(speeds, turbine_radii)))


def sample_renewables(wind: WindModel, scenario: Scenario, rng_seed, params: PowerParams = PowerParams()) -> RenewableRealization:
    """Harvested wind power per station.

    Speeds depend only on the seed and station count, so the same seed gives
    the same speeds whatever the turbine radii are.
    """
    speeds = sample_wind_speeds(wind, scenario.num_stations, rng_seed)
    return renewables_from_speeds(speeds, [s.turbine_radius for s in scenario.stations], params.air_density)
