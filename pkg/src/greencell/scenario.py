"""Network/user snapshots and their coverage structure.

Station 0 is always the macro base station (MBS); stations 1..N are small
cells. Coverage is the closed disk ``d(m, n) <= r_n``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import CapacityInfeasible, GreencellError, UncoveredUser

# Small-cell coordinates of the reference layout, in metres.
REFERENCE_SBS_POSITIONS = (
    (200.0, 200.0),
    (-200.0, -200.0),
    (200.0, -200.0),
    (-200.0, 200.0),
    (0.0, -400.0),
    (0.0, 400.0),
    (400.0, 0.0),
    (-400.0, 0.0),
)


@dataclass(frozen=True)
class BaseStation:
    id: int
    x: float
    y: float
    radius: float
    capacity: int
    static_power: float = 2000.0
    off_power: float = 0.0
    turbine_radius: float = 0.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"station {self.id}: coverage radius must be positive")
        if self.capacity < 0:
            raise ValueError(f"station {self.id}: capacity must be >= 0")
        if self.static_power < 0 or self.off_power < 0:
            raise ValueError(f"station {self.id}: power constants must be >= 0")
        if self.turbine_radius < 0:
            raise ValueError(f"station {self.id}: turbine radius must be >= 0")


@dataclass(frozen=True)
class User:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class Scenario:
    """Immutable snapshot. Build through :func:`build_scenario`."""

    stations: tuple[BaseStation, ...]
    users: tuple[User, ...]
    distances: np.ndarray = field(repr=False, compare=False)  # (M, N+1) metres
    coverage_bs: tuple[tuple[int, ...], ...] = field(repr=False)
    coverage_user: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def num_stations(self) -> int:
        return len(self.stations)

    @property
    def num_users(self) -> int:
        return len(self.users)

    def distance(self, m: int, n: int) -> float:
        return float(self.distances[m, n])

    def covers(self, m: int, n: int) -> bool:
        return n in self.coverage_user[m]

    def coverage_pairs(self) -> list[tuple[int, int]]:
        """All (user, station) pairs with the user inside the station's disk, user-major."""
        return [(m, n) for m in range(self.num_users) for n in self.coverage_user[m]]

    def with_turbine_radius(self, radius: float) -> "Scenario":
        stations = [replace(s, turbine_radius=radius) for s in self.stations]
        return build_scenario(stations, self.users)


def _distances(stations, users) -> np.ndarray:
    if not users:
        return np.zeros((0, len(stations)))
    ux = np.array([[u.x, u.y] for u in users], dtype=float)
    bx = np.array([[s.x, s.y] for s in stations], dtype=float)
    diff = ux[:, None, :] - bx[None, :, :]
    return np.sqrt((diff**2).sum(axis=2))


def build_scenario(stations, users) -> Scenario:
    stations = tuple(stations)
    users = tuple(users)
    if not stations:
        raise GreencellError("at least one station (the MBS) is required")
    for i, s in enumerate(stations):
        if s.id != i:
            raise GreencellError(f"station ids must be 0..N in order, got {s.id} at position {i}")
    for i, u in enumerate(users):
        if u.id != i:
            raise GreencellError(f"user ids must be 0..M-1 in order, got {u.id} at position {i}")

    d = _distances(stations, users)
    radii = np.array([s.radius for s in stations])
    inside = d <= radii[None, :]
    coverage_user = tuple(tuple(int(n) for n in np.flatnonzero(row)) for row in inside)
    coverage_bs = tuple(tuple(int(m) for m in np.flatnonzero(inside[:, n])) for n in range(len(stations)))
    for m, cov in enumerate(coverage_user):
        if not cov:
            raise UncoveredUser(m)
    total = sum(s.capacity for s in stations)
    if total < len(users):
        raise CapacityInfeasible(f"total capacity {total} < {len(users)} users")
    d.setflags(write=False)
    return Scenario(stations, users, d, coverage_bs, coverage_user)


def generate_users(rng_seed: int, count: int, mbs_radius: float) -> list[User]:
    """Draw ``count`` users uniformly over the disk of radius ``mbs_radius`` centred at the origin."""
    if count < 0:
        raise ValueError("count must be >= 0")
    if not mbs_radius > 0:
        raise ValueError("mbs_radius must be positive")
    rng = np.random.default_rng(rng_seed)
    u = rng.random((count, 2))
    r = mbs_radius * np.sqrt(u[:, 0])
    theta = 2.0 * math.pi * u[:, 1]
    xs, ys = r * np.cos(theta), r * np.sin(theta)
    return [User(i, float(x), float(y)) for i, (x, y) in enumerate(zip(xs, ys))]


@dataclass(frozen=True)
class Layout:
    """Station geometry and constants for a generated scenario family."""

    sbs_positions: tuple[tuple[float, float], ...] = REFERENCE_SBS_POSITIONS
    mbs_radius: float = 600.0
    sbs_radius: float = 200.0
    mbs_capacity: int = 200
    sbs_capacity: int = 60
    static_power: float = 2000.0
    off_power: float = 0.0
    turbine_radius: float = 0.0
    num_users: int = 300

    def stations(self) -> list[BaseStation]:
        common = dict(static_power=self.static_power, off_power=self.off_power, turbine_radius=self.turbine_radius)
        out = [BaseStation(0, 0.0, 0.0, self.mbs_radius, self.mbs_capacity, **common)]
        for i, (x, y) in enumerate(self.sbs_positions, start=1):
            out.append(BaseStation(i, float(x), float(y), self.sbs_radius, self.sbs_capacity, **common))
        return out


REFERENCE_LAYOUT = Layout()
DESK_LAYOUT = Layout(sbs_positions=REFERENCE_SBS_POSITIONS[:4], mbs_capacity=30, sbs_capacity=8, num_users=40)


def layout_scenario(layout: Layout, rng_seed: int) -> Scenario:
    users = generate_users(rng_seed, layout.num_users, layout.mbs_radius)
    return build_scenario(layout.stations(), users)


def reference_scenario(rng_seed: int) -> Scenario:
    """Reference network: MBS plus eight small cells, 300 uniformly dropped users."""
    return layout_scenario(REFERENCE_LAYOUT, rng_seed)


def all_on_assignable(scenario: Scenario) -> bool:
    """True when every user can be served with all stations ON and capacities respected."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import maximum_flow

    M, N1 = scenario.num_users, scenario.num_stations
    if M == 0:
        return True
    # source=0, users 1..M, stations M+1..M+N1, sink M+N1+1
    src, sink = 0, M + N1 + 1
    rows, cols, caps = [], [], []
    for m in range(M):
        rows.append(src), cols.append(1 + m), caps.append(1)
        for n in scenario.coverage_user[m]:
            rows.append(1 + m), cols.append(1 + M + n), caps.append(1)
    for n, s in enumerate(scenario.stations):
        rows.append(1 + M + n), cols.append(sink), caps.append(s.capacity)
    g = csr_matrix((np.array(caps, dtype=np.int32), (rows, cols)), shape=(sink + 1, sink + 1))
    return maximum_flow(g, src, sink).flow_value == M


# -- JSON ---------------------------------------------------------------------

def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "stations": [
            {
                "id": s.id,
                "x_m": s.x,
                "y_m": s.y,
                "radius_m": s.radius,
                "capacity": s.capacity,
                "static_power_w": s.static_power,
                "off_power_w": s.off_power,
                "turbine_radius_m": s.turbine_radius,
            }
            for s in scenario.stations
        ],
        "users": [{"id": u.id, "x_m": u.x, "y_m": u.y} for u in scenario.users],
    }


_STATION_KEYS = ("id", "x_m", "y_m", "radius_m", "capacity", "static_power_w", "off_power_w", "turbine_radius_m")


def scenario_from_dict(data: dict) -> Scenario:
    try:
        raw_stations = data["stations"]
        raw_users = data["users"]
    except (KeyError, TypeError) as exc:
        raise GreencellError(f"scenario JSON needs 'stations' and 'users': {exc}") from None
    stations = []
    for s in raw_stations:
        missing = [k for k in _STATION_KEYS if k not in s]
        if missing:
            raise GreencellError(f"station entry missing {missing}")
        if int(s["capacity"]) != s["capacity"]:
            raise GreencellError("station capacity must be an integer")
        stations.append(
            BaseStation(
                int(s["id"]),
                float(s["x_m"]),
                float(s["y_m"]),
                float(s["radius_m"]),
                int(s["capacity"]),
                float(s["static_power_w"]),
                float(s["off_power_w"]),
                float(s["turbine_radius_m"]),
            )
        )
    users = []
    for u in raw_users:
        if not all(k in u for k in ("id", "x_m", "y_m")):
            raise GreencellError("user entry needs id, x_m, y_m")
        users.append(User(int(u["id"]), float(u["x_m"]), float(u["y_m"])))
    return build_scenario(stations, users)


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")
