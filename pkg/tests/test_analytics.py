"""Demand descriptors and accounting helpers against hand arithmetic."""

import numpy as np
import pytest

from robocharge.domain import (
    DemandScenario,
    Schedule,
    Session,
    StationConfig,
    TariffAndCosts,
    TimeGrid,
)
from robocharge.errors import DataError
from robocharge.analytics import (
    AnnualSummary,
    annualize,
    capex_daily_usd,
    csi,
    poi,
    rci,
    satisfied_rate,
    scale_demand,
)
from robocharge.stochastic import synthetic_pool


def test_capital_ratio():
    t = TariffAndCosts(capital_fc_usd=5400.0, capital_rc_usd=10800.0)
    assert rci(t) == pytest.approx(2.0)
    with pytest.raises(DataError):
        rci(TariffAndCosts(capital_fc_usd=0.0))


def test_slackness_hand_values():
    grid = TimeGrid.uniform()
    # 4 h stay at 6.6 kW could deliver 26.4 kWh; asking 13.2 leaves half
    # the stay slack, asking everything leaves none
    half = Session(id=0, arrival=0, departure=16, demand_kwh=13.2)
    full = Session(id=1, arrival=16, departure=32, demand_kwh=26.4)
    assert csi(DemandScenario.ordered((half,)), grid) == pytest.approx(0.5)
    assert csi(DemandScenario.ordered((full,)), grid) == pytest.approx(0.0)
    assert csi(DemandScenario.ordered((half, full)), grid) == pytest.approx(0.25)
    with pytest.raises(DataError):
        csi(DemandScenario.ordered(()), grid)


def test_slackness_accounts_for_efficiency():
    grid = TimeGrid.uniform()
    s = Session(id=0, arrival=0, departure=16, demand_kwh=13.2)
    # at 50 % efficiency the same ask occupies the whole stay
    assert csi(DemandScenario.ordered((s,)), grid, efficiency=0.5) == pytest.approx(0.0)


def test_peak_overlap_hand_values():
    grid = TimeGrid.uniform()
    tariff = TariffAndCosts()  # peak rate 34 on steps 64..83
    inside = Session(id=0, arrival=64, departure=72, demand_kwh=6.0)
    outside = Session(id=1, arrival=0, departure=8, demand_kwh=6.0)
    assert poi(DemandScenario.ordered((inside,)), tariff, grid) == pytest.approx(1.0)
    assert poi(DemandScenario.ordered((outside,)), tariff, grid) == pytest.approx(0.0)
    # half of a 16-step straddling stay overlaps: weight is energy-even
    straddle = Session(id=0, arrival=56, departure=72, demand_kwh=6.0)
    assert poi(DemandScenario.ordered((straddle,)), tariff, grid) == pytest.approx(0.5)
    with pytest.raises(DataError):
        poi(DemandScenario.ordered(()), tariff, grid)


def test_satisfied_rate_thresholds():
    grid = TimeGrid.uniform(8, 0.25)
    sessions = (
        Session(id=0, arrival=0, departure=4, demand_kwh=4.0),
        Session(id=1, arrival=0, departure=4, demand_kwh=4.0),
        Session(id=2, arrival=4, departure=8, demand_kwh=0.0),
    )
    scn = DemandScenario.ordered(sessions)
    charge = np.zeros((3, 9))
    charge[0, :] = np.linspace(0.0, 4.0, 9)      # fully served by step 8
    charge[0, 4] = 4.0                            # ...and already by its departure
    charge[1, 4:] = 3.0                           # 75 % of the ask
    zeros = np.zeros((3, 8))
    sched = Schedule(
        assignment=("fix", "fix", "leave"),
        plug=np.zeros((3, 8), dtype=bool),
        power_kw=zeros,
        curtail_kw=zeros,
        charge_kwh=charge,
        virtual_charge_kwh=charge,
        fc_queue=np.zeros(3),
        rc_queue=np.zeros(3),
        fc_vacancy=np.zeros(3),
        rc_vacancy=np.zeros(3),
        peak_power_kw=0.0,
        disappointment_cents=np.zeros(3),
        objective_cents=0.0,
    )
    assert satisfied_rate(sched, scn, 0.9) == pytest.approx(2 / 3)
    assert satisfied_rate(sched, scn, 0.7) == pytest.approx(1.0)
    with pytest.raises(DataError):
        satisfied_rate(sched, DemandScenario.ordered(()), 0.9)


def test_daily_capex_amortization():
    t = TariffAndCosts(capital_fc_usd=5400.0, capital_rc_usd=10800.0,
                       lifespan_years=10.0)
    station = StationConfig(fc_count=2, rc_count=3)
    # (2*5400 + 3*10800) / 3650 days
    assert capex_daily_usd(station, t) == pytest.approx(43200.0 / 3650.0)


def test_annualize_signs():
    class Cost:
        opex_cents = -12_000.0  # a 120 $/day operating profit

    station = StationConfig(fc_count=1, rc_count=0)
    t = TariffAndCosts(capital_fc_usd=3650.0, lifespan_years=10.0)
    summary = annualize(Cost, station, t)
    assert summary.opex_daily_usd == pytest.approx(-120.0)
    assert summary.capex_daily_usd == pytest.approx(1.0)  # 3650 over 3650 days
    assert summary.tco_daily_usd == pytest.approx(-119.0)
    assert summary.annual_profit_usd == pytest.approx(365.0 * 119.0)


def test_demand_growth_scales_counts_not_energy():
    pool = synthetic_pool(np.random.default_rng(0), weekday_entries=50,
                          weekend_entries=20)
    grown = scale_demand(pool, 2.0, np.random.default_rng(1))
    assert len(grown.entries["weekday"]) == 100
    assert grown.daily_counts["weekday"][0] == pytest.approx(
        2.0 * pool.daily_counts["weekday"][0]
    )
    base_energy = {
        (s.arrival, s.departure, round(s.demand_kwh, 9))
        for s in pool.entries["weekday"]
    }
    assert all(
        (s.arrival, s.departure, round(s.demand_kwh, 9)) in base_energy
        for s in grown.entries["weekday"]
    )
    assert scale_demand(pool, 1.0, np.random.default_rng(2)) is pool
    with pytest.raises(DataError):
        scale_demand(pool, -0.5, np.random.default_rng(3))
