import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from robocharge.domain import (
    CostBreakdown,
    DemandScenario,
    Session,
    StationConfig,
    TariffAndCosts,
    TimeGrid,
    clip_target,
    default_tou,
    presence_indicator,
)


def make_session(**kw):
    base = dict(id=0, arrival=4, departure=8, demand_kwh=5.0)
    base.update(kw)
    return Session(**base)


class TestTimeGrid:
    def test_uniform_day(self):
        grid = TimeGrid.uniform()
        assert grid.step_count == 96
        assert grid.total_hours == pytest.approx(24.0)
        assert grid.is_uniform

    def test_hours_between(self):
        grid = TimeGrid(step_hours=(0.25, 0.25, 1.0, 2.0))
        assert grid.hours_between(0, 4) == pytest.approx(3.5)
        assert grid.hours_between(1, 3) == pytest.approx(1.25)
        assert grid.hours_between(2, 2) == 0.0

    def test_rejects_empty_and_nonpositive(self):
        with pytest.raises(ValueError):
            TimeGrid(step_hours=())
        with pytest.raises(ValueError):
            TimeGrid(step_hours=(0.25, 0.0))


class TestSession:
    def test_target_is_derived(self):
        s = make_session(init_kwh=2.0, demand_kwh=5.0)
        assert s.target_kwh == pytest.approx(7.0)

    def test_presence_half_open(self):
        s = make_session(arrival=4, departure=8)
        assert presence_indicator(s, 3) == 0
        assert presence_indicator(s, 4) == 1
        assert presence_indicator(s, 7) == 1
        assert presence_indicator(s, 8) == 0

    @pytest.mark.parametrize(
        "kw",
        [
            dict(arrival=5, departure=5),
            dict(arrival=-1),
            dict(demand_kwh=-0.1),
            dict(init_kwh=-0.1),
            dict(max_power_kw=0.0),
            dict(tolerance=-1.0),
            dict(preassigned_fix=True, preassigned_robo=True, arrival=0),
            dict(preassigned_fix=True, arrival=3),
        ],
    )
    def test_rejects_bad_fields(self, kw):
        with pytest.raises(ValueError):
            make_session(**kw)

    def test_penalty_shadow_defaults_to_own_fields(self):
        s = make_session(init_kwh=1.0, demand_kwh=4.0)
        assert s.effective_penalty_init_kwh == pytest.approx(1.0)
        assert s.effective_penalty_demand_kwh == pytest.approx(4.0)


class TestClipTarget:
    def test_caps_at_deliverable_energy(self):
        # 2 quarter-hour steps at 6.6 kW, unit efficiency: at most 3.3 kWh.
        grid = TimeGrid.uniform(steps=4)
        s = Session(id=0, arrival=0, departure=2, demand_kwh=10.0)
        clipped = clip_target(s, grid)
        assert clipped.demand_kwh == pytest.approx(3.3)
        assert clipped.penalty_demand_kwh == pytest.approx(10.0)
        assert clipped.penalty_init_kwh == pytest.approx(0.0)

    def test_noop_when_demand_fits(self):
        grid = TimeGrid.uniform(steps=96)
        s = make_session(arrival=0, departure=8, demand_kwh=3.0)
        assert clip_target(s, grid) is s

    def test_efficiency_shrinks_deliverable(self):
        grid = TimeGrid.uniform(steps=4)
        s = Session(id=0, arrival=0, departure=2, demand_kwh=10.0)
        clipped = clip_target(s, grid, efficiency=0.5)
        assert clipped.demand_kwh == pytest.approx(1.65)

    @given(
        arrival=st.integers(0, 90),
        length=st.integers(1, 6),
        demand=st.floats(0.0, 50.0, allow_nan=False),
        init=st.floats(0.0, 10.0, allow_nan=False),
    )
    def test_idempotent(self, arrival, length, demand, init):
        grid = TimeGrid.uniform()
        s = Session(
            id=0,
            arrival=arrival,
            departure=arrival + length,
            demand_kwh=demand,
            init_kwh=init,
        )
        once = clip_target(s, grid)
        twice = clip_target(once, grid)
        assert twice == once
        # Shadow always remembers the original ask.
        assert once.effective_penalty_demand_kwh == pytest.approx(demand)
        assert once.demand_kwh <= demand + 1e-12


class TestDemandScenario:
    def test_rejects_unsorted(self):
        a = make_session(id=0, arrival=10, departure=12)
        b = make_session(id=1, arrival=4, departure=8)
        with pytest.raises(ValueError):
            DemandScenario(sessions=(a, b))

    def test_ordered_sorts_and_reindexes(self):
        a = make_session(id=7, arrival=10, departure=12)
        b = make_session(id=3, arrival=4, departure=8)
        scen = DemandScenario.ordered([a, b], probability=0.5, label="weekday")
        assert [s.id for s in scen.sessions] == [0, 1]
        assert [s.arrival for s in scen.sessions] == [4, 10]
        assert scen.probability == 0.5

    def test_rejects_duplicate_ids(self):
        a = make_session(id=0, arrival=1, departure=3)
        b = make_session(id=0, arrival=2, departure=4)
        with pytest.raises(ValueError):
            DemandScenario(sessions=(a, b))


class TestStationConfig:
    def test_base_load_broadcast(self):
        grid = TimeGrid.uniform(steps=4)
        st_ = StationConfig(fc_count=1, rc_count=1, base_load_kw=2.0)
        assert np.allclose(st_.base_load_profile(grid), [2.0] * 4)

    def test_base_load_profile_shape_checked(self):
        grid = TimeGrid.uniform(steps=4)
        st_ = StationConfig(fc_count=1, rc_count=0, base_load_kw=(1.0, 2.0))
        with pytest.raises(ValueError):
            st_.base_load_profile(grid)

    def test_rejects_negative_counts(self):
        with pytest.raises(ValueError):
            StationConfig(fc_count=-1, rc_count=0)


class TestTariff:
    def test_tou_bands(self):
        tou = default_tou()
        # 16:00-21:00 peak, 09:00-16:00 and 21:00-24:00 off-peak, rest super.
        assert tou[64] == 34.0 and tou[83] == 34.0
        assert tou[36] == 13.0 and tou[63] == 13.0 and tou[84] == 13.0
        assert tou[95] == 13.0
        assert tou[0] == 11.0 and tou[35] == 11.0

    def test_demand_charge_prorated_to_days(self):
        # $18/kW per 30-day cycle -> 60 cents/kW per day.
        t = TariffAndCosts()
        assert t.demand_charge_cents_per_kw_day == pytest.approx(60.0)

    def test_capex_amortization(self):
        # 3 fixed + 4 robotic at $5400/$10800 over 10 years:
        # $59400 / 3650 days = $16.2739726/day.
        t = TariffAndCosts()
        assert t.capex_daily_cents(3, 4) == pytest.approx(1627.39726, abs=1e-4)

    def test_tou_on_coarse_grid_averages(self):
        t = TariffAndCosts()
        grid = TimeGrid(step_hours=(2.0,))
        # One 2-hour step covering 15:00-17:00: half off-peak, half peak.
        rate = t.tou_for_grid(grid, offset_hours=15.0)
        assert rate[0] == pytest.approx(0.5 * 13.0 + 0.5 * 34.0)

    def test_tou_wraps_past_midnight(self):
        t = TariffAndCosts()
        grid = TimeGrid(step_hours=(2.0,))
        # 23:00-01:00: one off-peak hour then one super-off-peak hour.
        rate = t.tou_for_grid(grid, offset_hours=23.0)
        assert rate[0] == pytest.approx(0.5 * 13.0 + 0.5 * 11.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            TariffAndCosts(fee_cents_per_kwh=-1.0)
        with pytest.raises(ValueError):
            TariffAndCosts(unsat_thresholds=(1.0,))  # length mismatch
        with pytest.raises(ValueError):
            TariffAndCosts(sr_threshold=0.0)


class TestCostBreakdown:
    def test_opex_is_exact_sum(self):
        c = CostBreakdown(
            tou_cents=100.0,
            fee_cents=250.0,
            demand_cents=60.0,
            switch_cents=20.0,
            disappointment_cents=40.0,
        )
        assert c.opex_cents == pytest.approx(100.0 - 250.0 + 60.0 + 20.0 + 40.0)
        assert c.tco_cents == pytest.approx(c.opex_cents)

    def test_capex_added_on_top(self):
        c = CostBreakdown(tou_cents=10.0).with_capex(500.0)
        assert c.tco_cents == pytest.approx(10.0 + 500.0)
        assert c.tco_usd == pytest.approx(c.tco_cents / 100.0)
