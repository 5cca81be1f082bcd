import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from greencell.errors import InvalidDecision, NotInCoverage
from greencell.power import (
    Decision, PowerParams, RenewableRealization, WindModel, kappa, p_nonrenew, p_nonrenew_total,
    p_on, p_total, sample_renewables, sample_wind_speeds, validate_decision, wind_power,
)
from greencell.scenario import BaseStation, User, build_scenario
from instances import random_decision, seeds, small_scenario

P = PowerParams()


def mbs_with_users(*xy, static=2000.0, off=0.0):
    return build_scenario([BaseStation(0, 0, 0, 600, 10, static, off)], [User(i, x, y) for i, (x, y) in enumerate(xy)])


# frozen from direct evaluation of 18 * (d_km) ** 2.6
KAPPA_200 = 0.2741261671750865
KAPPA_600 = 4.76942205985956


@pytest.mark.parametrize("x, expected", [(0.0, 0.0), (200.0, KAPPA_200), (600.0, KAPPA_600)])
def test_kappa_uses_kilometres(x, expected):
    sc = mbs_with_users((x, 0.0))
    assert kappa(sc, P, 0, 0) == pytest.approx(expected, rel=1e-12)


def test_kappa_close_to_rounded_reference_values():
    sc = mbs_with_users((200.0, 0.0), (600.0, 0.0))
    assert kappa(sc, P, 0, 0) == pytest.approx(0.2740, abs=5e-4)
    assert kappa(sc, P, 1, 0) == pytest.approx(4.766, rel=1e-3)


def test_kappa_outside_coverage_raises():
    sc = build_scenario([BaseStation(0, 0, 0, 600, 5), BaseStation(1, 400, 0, 100, 5)], [User(0, -100, 0)])
    with pytest.raises(NotInCoverage):
        kappa(sc, P, 0, 1)


def test_p_on_sums_served_users():
    sc = mbs_with_users((200.0, 0.0), (0.0, 200.0))
    assert p_on(sc, P, Decision((1,), (0, 0)), 0) == pytest.approx(2000.0 + 2 * KAPPA_200)
    one = mbs_with_users((200.0, 0.0))
    assert p_on(one, P, Decision((1,), (0,)), 0) == pytest.approx(2000.0 + KAPPA_200)
    empty = mbs_with_users()
    assert p_on(empty, P, Decision((1,), ()), 0) == 2000.0


def two_station(off=0.0):
    return build_scenario(
        [BaseStation(0, 0, 0, 600, 5), BaseStation(1, 300, 0, 200, 5, 2000.0, off)],
        [User(0, 0, 0)],
    )


def test_p_total_modes():
    sc = two_station()
    d_off = Decision((1, 0), (0,))
    assert p_total(sc, P, d_off, 1) == 0.0
    d_on = Decision((1, 1), (0,))
    assert p_total(sc, P, d_on, 1) == p_on(sc, P, d_on, 1) == 2000.0
    assert p_total(two_station(off=50.0), P, d_off, 1) == 50.0


def test_nonrenewable_per_station_max():
    sc = mbs_with_users()
    d = Decision((1,), ())
    assert p_nonrenew_total(sc, P, d, RenewableRealization((5000.0,))) == 0.0
    assert p_nonrenew_total(sc, P, d, RenewableRealization((0.0,))) == 2000.0


def test_no_renewable_sharing_between_stations():
    sc = build_scenario([BaseStation(0, 0, 0, 600, 5), BaseStation(1, 300, 0, 200, 5, 1500.0)], [])
    d = Decision((1, 1), ())
    assert p_nonrenew_total(sc, P, d, RenewableRealization((1500.0, 2000.0))) == pytest.approx(500.0)


def test_zero_turbine_gives_no_power():
    sc = mbs_with_users()
    assert sample_renewables(WindModel(), sc, 3).p_renew == (0.0,)


def test_cubic_power_law():
    # 0.5 * 1.225 * pi * 3**2 * 6.69**3
    assert wind_power(6.69, 3.0, 1.225) == pytest.approx(5185.335108974544, rel=1e-12)
    assert wind_power(6.69, 3.0, 1.225) == pytest.approx(5187, rel=1e-3)


def test_weibull_mean_matches_gamma_formula():
    wind = WindModel()
    v = sample_wind_speeds(wind, 100_000, 11)
    expected = wind.weibull_scale * math.gamma(1 + 1 / wind.weibull_shape)
    assert expected == pytest.approx(5.926, abs=1e-3)
    assert v.mean() == pytest.approx(expected, rel=0.01)


def test_weibull_distribution_shape():
    from scipy import stats

    wind = WindModel()
    v = sample_wind_speeds(wind, 20_000, 5)
    ks = stats.kstest(v, stats.weibull_min(wind.weibull_shape, scale=wind.weibull_scale).cdf)
    assert ks.pvalue > 0.001


def test_sampling_is_seeded():
    sc = small_scenario(np.random.default_rng(0), 3, 5).with_turbine_radius(2.0)
    assert sample_renewables(WindModel(), sc, 42) == sample_renewables(WindModel(), sc, 42)
    assert sample_renewables(WindModel(), sc, 42) != sample_renewables(WindModel(), sc, 43)


def test_same_seed_same_speeds_across_turbine_radii():
    sc = small_scenario(np.random.default_rng(1), 3, 5)
    small = sample_renewables(WindModel(), sc.with_turbine_radius(1.5), 9)
    big = sample_renewables(WindModel(), sc.with_turbine_radius(4.5), 9)
    assert np.allclose(np.array(big.p_renew), 9.0 * np.array(small.p_renew))


def test_validate_decision_catches_each_constraint():
    sc = build_scenario(
        [BaseStation(0, 0, 0, 600, 1), BaseStation(1, 100, 0, 200, 1)],
        [User(0, 100, 0), User(1, 90, 0)],
    )
    validate_decision(sc, Decision((1, 1), (0, 1)))
    with pytest.raises(InvalidDecision):
        validate_decision(sc, Decision((0, 1), (1, 1)))  # MBS off
    with pytest.raises(InvalidDecision):
        validate_decision(sc, Decision((1, 0), (0, 1)))  # served by OFF station
    with pytest.raises(InvalidDecision):
        validate_decision(sc, Decision((1, 1), (0, 0)))  # MBS over capacity


def test_decision_json_round_trip():
    d = Decision((1, 0, 1), (0, 2, 0))
    assert Decision.from_dict(d.to_dict()) == d
    assert d.to_dict() == {"a": [1, 0, 1], "assignments": [{"user": 0, "bs": 0}, {"user": 1, "bs": 2}, {"user": 2, "bs": 0}]}


def test_renewables_json_round_trip():
    r = RenewableRealization((1.5, 0.0, 2.25))
    assert RenewableRealization.from_dict(r.to_dict()) == r
    assert r.to_dict() == {"p_renew_w": [1.5, 0.0, 2.25]}


@given(seeds, st.integers(0, 8), st.floats(0, 5000))
def test_more_renewables_never_increase_objective(seed, n_bump, bump):
    rng = np.random.default_rng(seed)
    sc = small_scenario(rng, 3, 8)
    d = random_decision(rng, sc)
    if d is None:
        return
    base = rng.uniform(0, 3000, sc.num_stations)
    more = base.copy()
    more[n_bump % sc.num_stations] += bump
    lo = p_nonrenew_total(sc, P, d, RenewableRealization(tuple(more)))
    hi = p_nonrenew_total(sc, P, d, RenewableRealization(tuple(base)))
    assert lo <= hi + 1e-9


@given(seeds)
def test_objective_separable_and_nonnegative(seed):
    rng = np.random.default_rng(seed)
    sc = small_scenario(rng, 3, 8)
    d = random_decision(rng, sc)
    if d is None:
        return
    renew = RenewableRealization(tuple(rng.uniform(0, 3000, sc.num_stations)))
    terms = [p_nonrenew(sc, P, d, renew, n) for n in range(sc.num_stations)]
    assert all(t >= 0 for t in terms)
    assert p_nonrenew_total(sc, P, d, renew) == pytest.approx(sum(terms))


@given(seeds)
def test_switching_off_an_idle_station_never_hurts(seed):
    rng = np.random.default_rng(seed)
    sc = small_scenario(rng, 3, 6, off_power=40.0, static_power=1000.0)
    d = random_decision(rng, sc)
    if d is None:
        return
    renew = RenewableRealization(tuple(rng.uniform(0, 2000, sc.num_stations)))
    for n in range(1, sc.num_stations):
        if d.a[n] and d.load(n) == 0:
            a = list(d.a)
            a[n] = 0
            off = Decision(tuple(a), d.serving)
            assert p_nonrenew(sc, P, off, renew, n) == max(40.0 - renew[n], 0.0)
            assert p_nonrenew_total(sc, P, off, renew) <= p_nonrenew_total(sc, P, d, renew) + 1e-9
