"""Operation model against hand-solved oracles, the validator, and exhaustive search."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instance_families import quantized_instance
from robocharge.domain import (
    DemandScenario,
    Schedule,
    Session,
    StationConfig,
    TariffAndCosts,
    TimeGrid,
)
from robocharge.errors import ConfigError, DataError
from robocharge.operation import (
    OperationOptions,
    brute_force_operation,
    queue_capacity,
    replay_queue,
    reprice,
    solve_operation,
    validate_schedule,
)


def flat_tariff(rate=11.0, steps=96, dc=18.0, switch=0.0, rates=(10.0, 20.0)):
    return TariffAndCosts(
        tou_cents_per_kwh=(rate,) * steps,
        fee_cents_per_kwh=35.0,
        demand_charge_usd_per_kw=dc,
        switch_cost_cents=switch,
        unsat_penalty_cents_per_kwh=rates,
    )


# -- hand-solved linear program -------------------------------------------
#
# One car, present 09:00-17:00 (steps 36..68 of the quarter-hour day),
# 13.2 kWh of demand, flat 11 cent tariff, 35 cent fee, 18 $/kW demand
# charge prorated to 60 cent/kW/day, no switch cost.  Delivering a kWh
# nets 24 cents; shaving the peak saves only 60 cents per kW, which over
# the 8 h stay is 15 cents per kWh forgone.  So the optimum delivers
# everything at the flattest possible profile:
#   energy margin  (11 - 35) * 13.2        = -316.80
#   demand charge  60 * (13.2 / 8)         =  +99.00
#   total                                  = -217.80


def test_spread_out_charging_hand_value():
    grid = TimeGrid.uniform()
    tariff = flat_tariff()
    station = StationConfig(fc_count=3, rc_count=4)
    scen = DemandScenario.ordered(
        (Session(id=0, arrival=36, departure=68, demand_kwh=13.2),)
    )
    sched, cost = solve_operation(scen, station, tariff, grid, mip_gap=0.0)
    assert sched.objective_cents == pytest.approx(-217.8, abs=1e-4)
    assert cost.opex_cents == pytest.approx(-217.8, abs=1e-4)
    assert sched.peak_power_kw == pytest.approx(1.65, abs=1e-6)
    assert validate_schedule(sched, scen, station, grid) == []


def test_billing_floor_shifts_only_the_demand_term():
    # with 5 kW already committed this billing cycle the peak term is a
    # constant 300 cents and flattening buys nothing
    grid = TimeGrid.uniform()
    tariff = flat_tariff()
    station = StationConfig(fc_count=3, rc_count=4)
    scen = DemandScenario.ordered(
        (Session(id=0, arrival=36, departure=68, demand_kwh=13.2),)
    )
    opts = OperationOptions(demand_charge_floor_kw=5.0)
    sched, cost = solve_operation(scen, station, tariff, grid, opts, mip_gap=0.0)
    assert sched.objective_cents == pytest.approx(-316.8 + 300.0, abs=1e-4)
    assert cost.opex_cents == pytest.approx(-16.8, abs=1e-4)


# -- disappointment accounting --------------------------------------------


def test_clipped_session_pays_disappointment_against_original_demand():
    # 10 kWh wanted, 4 kW rating, 2 h stay: only 8 kWh fit.  Tier 1 misses
    # by 2 kWh at 10 c, tier 2 by 1 kWh at 20 c: 40 cents on top of the
    # -192 cent margin of the 8 kWh actually sold.
    grid = TimeGrid.uniform(steps=8, step_hours=0.25)
    tariff = flat_tariff(steps=8, dc=0.0)
    station = StationConfig(fc_count=1, rc_count=0)
    raw = DemandScenario.ordered(
        (Session(id=0, arrival=0, departure=8, demand_kwh=10.0, max_power_kw=4.0),)
    )
    scen = raw.clipped(grid)
    assert scen.sessions[0].demand_kwh == pytest.approx(8.0)
    assert scen.sessions[0].effective_penalty_demand_kwh == pytest.approx(10.0)

    sched, cost = solve_operation(scen, station, tariff, grid, mip_gap=0.0)
    assert sched.objective_cents == pytest.approx(-24.0 * 8.0 + 40.0, abs=1e-4)
    assert sched.disappointment_cents[0] == pytest.approx(40.0, abs=1e-6)
    assert cost.disappointment_cents == pytest.approx(40.0, abs=1e-6)
    assert sched.delivered_kwh(0, 8) == pytest.approx(8.0, abs=1e-6)


# -- queue arithmetic ------------------------------------------------------


def test_queue_capacity_table():
    assert queue_capacity(1.0, 4, 10) == 8
    assert queue_capacity(0.3, 4, 9) == 5
    assert queue_capacity(0.0, 3, 5) == 3
    assert queue_capacity(math.inf, 4, 7) == 7
    assert queue_capacity(math.inf, 0, 7) == 0
    assert queue_capacity(2.0, 0, 9) == 0


def test_replay_queue_counts_only_unfinished_robotic_customers():
    # seven cars; the last arrives at step 4 and sees one fixed occupant,
    # five robotic customers still short of target and one already done.
    # Tolerance 1.0 with four robotic chargers accepts a queue of 8, so
    # the vacancy splits 2 fixed + 3 robotic and nobody is forced out.
    sessions = tuple(
        Session(id=j, arrival=0, departure=8, demand_kwh=6.6) for j in range(6)
    ) + (Session(id=6, arrival=4, departure=8, demand_kwh=3.3),)
    assignment = ["fix", "robo", "robo", "robo", "robo", "robo", "robo"]
    charge = np.zeros((7, 9))
    charge[5, :] = 6.6  # this one finished before the probe
    fc_q, rc_q, fc_v, rc_v, must_leave = replay_queue(
        sessions, assignment, charge, fc_count=3, rc_count=4,
        tolerances=[1.0] * 7,
    )
    assert fc_q[6] == 1 and rc_q[6] == 4
    assert fc_v[6] == 2 and rc_v[6] == 8 - 4
    assert not must_leave[6]

    charge[5, :] = 0.0  # now five unfinished ahead of the arrival
    _, rc_q2, _, rc_v2, _ = replay_queue(
        sessions, assignment, charge, fc_count=3, rc_count=4,
        tolerances=[1.0] * 7,
    )
    assert rc_q2[6] == 5 and rc_v2[6] == 3


def test_forced_leave_when_station_saturated():
    grid = TimeGrid.uniform(steps=6, step_hours=0.5)
    tariff = flat_tariff(steps=6, dc=0.0)
    station = StationConfig(fc_count=1, rc_count=0)
    scen = DemandScenario.ordered(
        (
            Session(id=0, arrival=0, departure=4, demand_kwh=6.6),
            Session(id=1, arrival=1, departure=5, demand_kwh=3.3),
        )
    )
    opts = OperationOptions(tolerance_override=0.0)
    sched, _ = solve_operation(scen, station, tariff, grid, opts, mip_gap=0.0)
    assert sched.assignment == ("fix", "leave")
    assert sched.fc_vacancy[1] == 0 and sched.rc_vacancy[1] == 0
    assert not np.any(sched.power_kw[1])
    assert validate_schedule(sched, scen, station, grid, opts) == []


def test_patient_drivers_make_queue_machinery_optional():
    grid = TimeGrid.uniform(steps=6, step_hours=0.5)
    tariff = flat_tariff(steps=6, dc=0.0)
    station = StationConfig(fc_count=1, rc_count=1)
    scen = DemandScenario.ordered(
        (
            Session(id=0, arrival=0, departure=4, demand_kwh=6.6),
            Session(id=1, arrival=1, departure=5, demand_kwh=3.3),
            Session(id=2, arrival=1, departure=6, demand_kwh=3.3),
        )
    )
    auto, _ = solve_operation(scen, station, tariff, grid, mip_gap=0.0)
    forced, _ = solve_operation(
        scen, station, tariff, grid, OperationOptions(queue="on"), mip_gap=0.0
    )
    assert auto.objective_cents == pytest.approx(forced.objective_cents, abs=1e-5)
    assert "leave" not in auto.assignment
    assert validate_schedule(auto, scen, station, grid) == []
    assert validate_schedule(forced, scen, station, grid, OperationOptions(queue="on")) == []


# -- switching -------------------------------------------------------------


def test_idle_plug_beats_paying_two_switches():
    # robotic customer needs 2 of 3 half-hour steps; the middle step is
    # expensive.  Unplugging there would cost two 100 cent switches, so
    # the optimum stays plugged and idles through the peak.
    grid = TimeGrid.uniform(steps=3, step_hours=0.5)
    tariff = TariffAndCosts(
        tou_cents_per_kwh=(11.0, 34.0, 11.0),
        fee_cents_per_kwh=35.0,
        demand_charge_usd_per_kw=0.0,
        switch_cost_cents=100.0,
        unsat_penalty_cents_per_kwh=(0.0, 0.0),
    )
    station = StationConfig(fc_count=1, rc_count=1)
    scen = DemandScenario.ordered(
        (Session(id=0, arrival=0, departure=3, demand_kwh=6.6),)
    )
    sched, cost = solve_operation(scen, station, tariff, grid, mip_gap=0.0)
    assert sched.objective_cents == pytest.approx(-158.4, abs=1e-4)
    assert cost.switch_cents == 0.0
    assert sched.power_kw[0, 1] == pytest.approx(0.0, abs=1e-6)

    best, bsched = brute_force_operation(scen, station, tariff, grid)
    assert best == pytest.approx(-158.4, abs=1e-6)
    assert bsched.switch_count(0) == 0


# -- repricing -------------------------------------------------------------


def test_reprice_single_step_by_hand():
    grid = TimeGrid.uniform(steps=1, step_hours=1.0)
    tariff = TariffAndCosts(
        tou_cents_per_kwh=(20.0,),
        fee_cents_per_kwh=35.0,
        demand_charge_usd_per_kw=18.0,
        switch_cost_cents=10.0,
    )
    station = StationConfig(fc_count=1, rc_count=0)
    scen = DemandScenario.ordered(
        (Session(id=0, arrival=0, departure=1, demand_kwh=6.6),)
    )
    sched = Schedule(
        assignment=("fix",),
        plug=np.ones((1, 1), dtype=np.int8),
        power_kw=np.full((1, 1), 6.6),
        curtail_kw=np.zeros((1, 1)),
        charge_kwh=np.array([[0.0, 6.6]]),
        virtual_charge_kwh=np.array([[0.0, 6.6]]),
        fc_queue=np.zeros(1, dtype=int),
        rc_queue=np.zeros(1, dtype=int),
        fc_vacancy=np.ones(1, dtype=int),
        rc_vacancy=np.zeros(1, dtype=int),
        peak_power_kw=6.6,
        disappointment_cents=np.zeros(1),
        objective_cents=0.0,
    )
    cost = reprice(sched, scen, station, tariff, grid)
    # 1 h horizon prorates the 60 cent/kW/day charge to 2.5 cent/kW
    assert cost.tou_cents == pytest.approx(132.0)
    assert cost.fee_cents == pytest.approx(231.0)
    assert cost.demand_cents == pytest.approx(16.5)
    assert cost.switch_cents == 0.0
    assert cost.disappointment_cents == 0.0
    assert cost.opex_cents == pytest.approx(-82.5)


# -- validator -------------------------------------------------------------


def _solved_pair():
    grid = TimeGrid.uniform(steps=6, step_hours=0.5)
    tariff = flat_tariff(steps=6, dc=0.0)
    station = StationConfig(fc_count=1, rc_count=1)
    scen = DemandScenario.ordered(
        (
            Session(id=0, arrival=0, departure=4, demand_kwh=6.6),
            Session(id=1, arrival=1, departure=5, demand_kwh=3.3),
        )
    )
    opts = OperationOptions(tolerance_override=0.0)
    sched, _ = solve_operation(scen, station, tariff, grid, opts, mip_gap=0.0)
    return sched, scen, station, grid, opts


def test_validator_accepts_solver_output():
    sched, scen, station, grid, opts = _solved_pair()
    assert validate_schedule(sched, scen, station, grid, opts) == []


def test_validator_flags_power_beyond_rating():
    sched, scen, station, grid, opts = _solved_pair()
    sched.power_kw[0, 0] = 50.0
    kinds = {v.kind for v in validate_schedule(sched, scen, station, grid, opts)}
    assert "power" in kinds


def test_validator_flags_capacity_overflow():
    sched, scen, station, grid, opts = _solved_pair()
    sched.assignment = ("fix", "fix")
    sched.plug[1, 1:5] = 1
    kinds = {v.kind for v in validate_schedule(sched, scen, station, grid, opts)}
    assert "capacity" in kinds


def test_validator_flags_queue_lies():
    sched, scen, station, grid, opts = _solved_pair()
    sched.fc_queue = sched.fc_queue.copy()
    sched.fc_queue[1] += 1
    kinds = {v.kind for v in validate_schedule(sched, scen, station, grid, opts)}
    assert "queue" in kinds


def test_validator_flags_broken_completion():
    sched, scen, station, grid, opts = _solved_pair()
    sched.virtual_charge_kwh[0, 4] -= 1.0
    kinds = {v.kind for v in validate_schedule(sched, scen, station, grid, opts)}
    assert "energy" in kinds


# -- exhaustive cross-checks ----------------------------------------------


def test_solver_matches_enumeration_on_quantized_family():
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(12):
        scen, station, tariff, grid, tol = quantized_instance(rng)
        opts = OperationOptions(tolerance_override=tol)
        sched, _ = solve_operation(scen, station, tariff, grid, opts, mip_gap=0.0)
        best, bsched = brute_force_operation(scen, station, tariff, grid, opts)
        assert sched.objective_cents == pytest.approx(best, abs=2e-4), (
            f"instance {checked}: solver {sched.objective_cents} vs enumeration {best}"
        )
        assert validate_schedule(sched, scen, station, grid, opts) == []
        assert validate_schedule(bsched, scen, station, grid, opts) == []
        checked += 1
    assert checked == 12


def test_solver_never_beaten_by_enumeration_with_full_costs():
    # with demand charge and disappointment on, the enumeration explores a
    # subset of the feasible set, so it can only be an upper bound
    rng = np.random.default_rng(11)
    for _ in range(6):
        scen, station, tariff, grid, tol = quantized_instance(rng, full_cost=True)
        opts = OperationOptions(tolerance_override=tol)
        sched, _ = solve_operation(scen, station, tariff, grid, opts, mip_gap=0.0)
        best, _ = brute_force_operation(scen, station, tariff, grid, opts)
        assert sched.objective_cents <= best + 1e-4
        assert validate_schedule(sched, scen, station, grid, opts) == []


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=15, deadline=None)
def test_solver_output_always_validates(seed):
    rng = np.random.default_rng(seed)
    scen, station, tariff, grid, tol = quantized_instance(rng, full_cost=True)
    opts = OperationOptions(tolerance_override=tol)
    sched, cost = solve_operation(scen, station, tariff, grid, opts, mip_gap=0.0)
    assert validate_schedule(sched, scen, station, grid, opts) == []
    assert cost.opex_cents == pytest.approx(sched.objective_cents, abs=2e-4)


# -- guard rails -----------------------------------------------------------


def test_unclipped_demand_is_rejected():
    grid = TimeGrid.uniform(steps=4, step_hours=0.25)
    scen = DemandScenario.ordered(
        (Session(id=0, arrival=0, departure=2, demand_kwh=50.0),)
    )
    with pytest.raises(DataError, match="clip"):
        solve_operation(scen, StationConfig(1, 1), flat_tariff(steps=4), grid)


def test_departure_past_horizon_is_rejected():
    grid = TimeGrid.uniform(steps=4, step_hours=0.25)
    scen = DemandScenario.ordered(
        (Session(id=0, arrival=0, departure=9, demand_kwh=1.0),)
    )
    with pytest.raises(DataError, match="horizon"):
        solve_operation(scen, StationConfig(1, 1), flat_tariff(steps=4), grid)


def test_queue_off_needs_patient_drivers():
    grid = TimeGrid.uniform(steps=4, step_hours=0.25)
    scen = DemandScenario.ordered(
        (Session(id=0, arrival=0, departure=2, demand_kwh=1.65),)
    )
    opts = OperationOptions(tolerance_override=0.5, queue="off")
    with pytest.raises(ConfigError):
        solve_operation(scen, StationConfig(1, 1), flat_tariff(steps=4), grid, opts)


def test_too_many_preassignments_rejected():
    grid = TimeGrid.uniform(steps=4, step_hours=0.25)
    scen = DemandScenario.ordered(
        (
            Session(id=0, arrival=0, departure=2, demand_kwh=1.65, preassigned_fix=True),
            Session(id=1, arrival=0, departure=2, demand_kwh=1.65, preassigned_fix=True),
        )
    )
    with pytest.raises(DataError, match="preassigned"):
        solve_operation(scen, StationConfig(1, 1), flat_tariff(steps=4), grid)


def test_preassignment_is_honored():
    grid = TimeGrid.uniform(steps=4, step_hours=0.5)
    tariff = flat_tariff(steps=4, dc=0.0)
    station = StationConfig(fc_count=1, rc_count=1)
    scen = DemandScenario.ordered(
        (
            Session(id=0, arrival=0, departure=3, demand_kwh=3.3, preassigned_robo=True),
            Session(id=1, arrival=0, departure=4, demand_kwh=3.3),
        )
    )
    sched, _ = solve_operation(scen, station, tariff, grid, mip_gap=0.0)
    assert sched.assignment[0] == "robo"
    assert validate_schedule(sched, scen, station, grid) == []
