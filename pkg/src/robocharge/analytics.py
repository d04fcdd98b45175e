"""Scenario descriptors and accounting summaries.

Four dimensionless indices describe what kind of demand a station
faces: the robot-to-fixed capital ratio, how much slack sessions carry,
how much of the load would overlap the tariff peak, and how demand
grows.  The rest of the module turns solved schedules into satisfaction
and annualized-profit figures.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .domain import (
    DemandScenario,
    Schedule,
    StationConfig,
    TariffAndCosts,
    TimeGrid,
)
from .errors import DataError
from .stochastic import SessionPool

__all__ = [
    "rci",
    "csi",
    "poi",
    "satisfied_rate",
    "capex_daily_usd",
    "AnnualSummary",
    "annualize",
    "scale_demand",
]


def rci(tariff: TariffAndCosts) -> float:
    """Capital cost of one robotic charger relative to one fixed charger."""
    if tariff.capital_fc_usd == 0:
        raise DataError("fixed-charger capital cost is zero; the ratio is undefined")
    return tariff.capital_rc_usd / tariff.capital_fc_usd


def csi(
    scenario: DemandScenario,
    grid: TimeGrid | None = None,
    efficiency: float = 1.0,
) -> float:
    """Mean share of each stay that is slack rather than required charging.

    A session needing its entire stay at full power contributes 0, one
    asking for nothing contributes 1; the average over sessions is the
    slackness of the day.  Assumes a clipped scenario, where the value
    lands in [0, 1].
    """
    grid = grid or TimeGrid.uniform()
    if not scenario.sessions:
        raise DataError("slackness of an empty scenario is undefined")
    ratios = []
    for s in scenario.sessions:
        dur = grid.hours_between(s.arrival, s.departure)
        required = s.demand_kwh / (efficiency * s.max_power_kw)
        ratios.append((dur - required) / dur)
    return float(np.mean(ratios))


def poi(
    scenario: DemandScenario,
    tariff: TariffAndCosts,
    grid: TimeGrid | None = None,
    efficiency: float = 1.0,
) -> float:
    """Share of demand that falls on peak-tariff steps under uniform charging.

    Each session's energy is spread evenly over its presence steps (per
    step: E/(eta * duration_steps), duration counted in steps as
    printed, which leaves a 1/eta factor in the numerator); steps whose
    rate equals the maximum rate count toward the overlap.
    """
    grid = grid or TimeGrid.uniform()
    total = sum(s.demand_kwh for s in scenario.sessions)
    if total <= 0:
        raise DataError("peak-overlap of zero total demand is undefined")
    tou = tariff.tou_for_grid(grid)
    at_peak = np.isclose(tou, tou.max(), atol=1e-9)
    acc = 0.0
    for s in scenario.sessions:
        share = s.demand_kwh / (efficiency * s.duration_steps)
        acc += share * int(np.count_nonzero(at_peak[s.arrival : s.departure]))
    return acc / total


def satisfied_rate(
    schedule: Schedule,
    scenario: DemandScenario,
    theta_sr: float | None = None,
    atol: float = 1e-6,
) -> float:
    """Fraction of drivers who left with at least theta_sr of their ask.

    Leavers with positive demand count as unsatisfied (their delivered
    energy is zero); zero-demand sessions always count as satisfied.
    """
    if not scenario.sessions:
        raise DataError("satisfied rate of an empty scenario is undefined")
    if theta_sr is None:
        theta_sr = 0.9
    good = 0
    for i, s in enumerate(scenario.sessions):
        delivered = schedule.charge_kwh[i, s.departure] - s.init_kwh
        if s.demand_kwh <= 0 or delivered >= theta_sr * s.demand_kwh - atol:
            good += 1
    return good / len(scenario.sessions)


def capex_daily_usd(station: StationConfig, tariff: TariffAndCosts) -> float:
    """Straight-line daily amortization of the charger fleet."""
    total = (
        tariff.capital_fc_usd * station.fc_count
        + tariff.capital_rc_usd * station.rc_count
    )
    return total / (tariff.lifespan_years * 365.0)


@dataclass(frozen=True)
class AnnualSummary:
    opex_daily_usd: float
    capex_daily_usd: float

    @property
    def tco_daily_usd(self) -> float:
        return self.opex_daily_usd + self.capex_daily_usd

    @property
    def annual_profit_usd(self) -> float:
        return -365.0 * self.tco_daily_usd


def annualize(breakdown, station: StationConfig, tariff: TariffAndCosts) -> AnnualSummary:
    """Annualized profit of running this station at the given daily cost."""
    return AnnualSummary(
        opex_daily_usd=breakdown.opex_cents / 100.0,
        capex_daily_usd=capex_daily_usd(station, tariff),
    )


def scale_demand(
    pool: SessionPool, dgi: float, rng: np.random.Generator
) -> SessionPool:
    """Grow (or shrink) demand by scaling how many sessions a day brings.

    Growth means more vehicles, not bigger batteries: daily counts are
    multiplied by ``dgi`` and the historical entries are resampled with
    replacement to the matching size; each session's energy is kept.
    """
    if dgi < 0:
        raise DataError("demand growth cannot be negative")
    if dgi == 1.0:
        return pool
    entries = {}
    for label, base in pool.entries.items():
        size = max(1, int(round(dgi * len(base))))
        picks = rng.integers(0, len(base), size=size)
        entries[label] = tuple(
            replace(base[k], id=j) for j, k in enumerate(picks)
        )
    counts = {
        label: (mean * dgi, std * dgi)
        for label, (mean, std) in pool.daily_counts.items()
    }
    return SessionPool(entries=entries, daily_counts=counts)
