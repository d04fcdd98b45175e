"""Behavior draws, the synthetic pool, traces, and the two predictors."""

import math

import numpy as np
import pytest

from robocharge.domain import Session
from robocharge.errors import DataError
from robocharge.stochastic import (
    ArrivalEvent,
    BehaviorParams,
    complete_information_predictor,
    day_label,
    demand_trace,
    naive_forecaster,
    perturb_departure,
    sample_profile,
    sample_tolerance,
    stay_decision,
    stay_probability,
    synthetic_pool,
)


# -- the stay sigmoid ------------------------------------------------------


def test_stay_probability_closed_form():
    # 1 / (1 + 2 e^{-2v}) at the default parameters
    assert stay_probability(0) == pytest.approx(1.0 / 3.0)
    assert stay_probability(-1) == pytest.approx(1.0 / (1.0 + 2.0 * math.e**2))
    assert stay_probability(1) == pytest.approx(1.0 / (1.0 + 2.0 * math.exp(-2.0)))
    assert stay_probability(10) > 0.999999


def test_stay_frequencies_match_sigmoid():
    # empirical stay shares after seeing -1, 0 and 1 vacancies
    rng = np.random.default_rng(5)
    n = 100_000
    for v, want in ((-1, 0.06), (0, 0.33), (1, 0.79)):
        stays = sum(stay_decision(v, rng) for _ in range(n))
        assert abs(stays / n - want) <= 0.005


def test_stay_decision_reproducible():
    a = [stay_decision(0, np.random.default_rng(3)) for _ in range(5)]
    b = [stay_decision(0, np.random.default_rng(3)) for _ in range(5)]
    assert a == b


def test_behavior_params_guards():
    with pytest.raises(DataError):
        BehaviorParams(sigmoid_a=0.0)
    with pytest.raises(DataError):
        BehaviorParams(tolerance_std=-0.1)
    with pytest.raises(DataError):
        BehaviorParams(min_duration_steps=0)


# -- tolerance and departure noise -----------------------------------------


def test_tolerance_truncates_at_zero():
    params = BehaviorParams(tolerance_mean=0.0, tolerance_std=1.0)
    rng = np.random.default_rng(1)
    draws = [sample_tolerance(params, rng) for _ in range(500)]
    assert min(draws) == 0.0
    assert all(t >= 0.0 for t in draws)


def test_departure_noise_off_is_identity():
    params = BehaviorParams(departure_std_steps=0.0)
    rng = np.random.default_rng(0)
    assert perturb_departure(40, params, rng, arrival=30) == 40


def test_departure_noise_respects_minimum_stay():
    params = BehaviorParams(departure_std_steps=50.0, min_duration_steps=2)
    rng = np.random.default_rng(0)
    draws = [perturb_departure(31, params, rng, arrival=30) for _ in range(200)]
    assert min(draws) == 32


def test_departure_before_arrival_rejected():
    with pytest.raises(DataError):
        perturb_departure(30, BehaviorParams(), np.random.default_rng(0), arrival=30)


# -- synthetic pool --------------------------------------------------------


def test_pool_sessions_fit_inside_a_day():
    pool = synthetic_pool(np.random.default_rng(42))
    for label in pool.labels():
        for s in pool.entries[label]:
            assert 0 <= s.arrival < s.departure <= 96
            cap = (s.departure - s.arrival) * 0.25 * s.max_power_kw
            assert 0.0 < s.demand_kwh <= cap


def test_pool_asks_about_half_the_stay():
    pool = synthetic_pool(np.random.default_rng(42))
    fracs = [
        s.demand_kwh / ((s.departure - s.arrival) * 0.25 * s.max_power_kw)
        for s in pool.entries["weekday"]
    ]
    assert 0.4 < float(np.mean(fracs)) < 0.6


def test_weekday_weekend_cycle():
    assert [day_label(d) for d in range(8)] == [
        "weekday"] * 5 + ["weekend"] * 2 + ["weekday"]


def test_sample_profile_count_and_guards():
    pool = synthetic_pool(np.random.default_rng(7))
    rng = np.random.default_rng(0)
    scn = sample_profile(pool, "weekday", 12, rng)
    assert len(scn.sessions) == 12
    assert [s.id for s in scn.sessions] == list(range(12))
    with pytest.raises(DataError):
        sample_profile(pool, "holiday", 3, rng)
    with pytest.raises(DataError):
        sample_profile(pool, "weekday", -1, rng)


# -- realized traces -------------------------------------------------------


def test_trace_is_sorted_with_fresh_ids():
    pool = synthetic_pool(np.random.default_rng(3))
    events = demand_trace(pool, BehaviorParams(), days=3, rng=np.random.default_rng(9))
    arrivals = [ev.step for ev in events]
    assert arrivals == sorted(arrivals)
    assert [ev.session.id for ev in events] != []
    assert len({ev.session.id for ev in events}) == len(events)
    for ev in events:
        assert ev.actual_departure >= ev.session.arrival + 1
        assert ev.session.tolerance >= 0.0


def test_trace_reproducible_under_seed():
    pool = synthetic_pool(np.random.default_rng(3))
    a = demand_trace(pool, BehaviorParams(), days=2, rng=np.random.default_rng(11))
    b = demand_trace(pool, BehaviorParams(), days=2, rng=np.random.default_rng(11))
    assert a == b


# -- predictors ------------------------------------------------------------


def hand_trace():
    s0 = Session(id=0, arrival=10, departure=20, demand_kwh=5.0)
    s1 = Session(id=1, arrival=30, departure=44, demand_kwh=6.0)
    return (
        ArrivalEvent(session=s0, actual_departure=22),
        ArrivalEvent(session=s1, actual_departure=40),
    )


def test_oracle_predictor_reveals_actual_departures():
    pred = complete_information_predictor(hand_trace())
    future = pred(10)
    assert [s.id for s in future] == [1]
    assert future[0].departure == 40  # the true unplug step, not the registered 44
    assert pred(5)[0].departure == 22
    assert pred(30) == ()


def test_naive_forecaster_stays_inside_the_day():
    pool = synthetic_pool(np.random.default_rng(21))
    pred = naive_forecaster(pool, np.random.default_rng(2))
    for t in (0, 40, 96 + 40):
        day = t // 96
        for s in pred(t):
            assert s.arrival > t
            assert s.arrival < (day + 1) * 96
            assert s.tolerance == 1.0
    # the typical day is fixed: asking twice gives the same profile
    assert pred(40) == pred(40)
