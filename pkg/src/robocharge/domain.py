"""Core value types for mixed-charger station scheduling.

Conventions used throughout the package: time is a discrete grid of steps
with per-step lengths in hours (a quarter-hour day of 96 steps unless stated
otherwise), power in kW, energy in kWh, and money in US cents internally.
Reports convert to dollars at the edge; nothing in here does.

A charging session occupies the half-open step interval [arrival, departure).
State quantities (accumulated charge) live on step boundaries 0..T, control
quantities (power, plug status) on steps 0..T-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "TimeGrid",
    "Session",
    "DemandScenario",
    "StationConfig",
    "TariffAndCosts",
    "Schedule",
    "CostBreakdown",
    "presence_indicator",
    "presence_steps",
    "clip_target",
    "default_tou",
]


@dataclass(frozen=True)
class TimeGrid:
    """Discrete scheduling horizon with possibly non-uniform step lengths."""

    step_hours: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.step_hours:
            raise ValueError("time grid needs at least one step")
        if any(h <= 0 for h in self.step_hours):
            raise ValueError("step lengths must be positive")

    @classmethod
    def uniform(cls, steps: int = 96, step_hours: float = 0.25) -> "TimeGrid":
        return cls(step_hours=(step_hours,) * steps)

    @property
    def step_count(self) -> int:
        return len(self.step_hours)

    @property
    def total_hours(self) -> float:
        return float(sum(self.step_hours))

    @property
    def is_uniform(self) -> bool:
        return len(set(self.step_hours)) == 1

    @cached_property
    def boundaries_hours(self) -> tuple[float, ...]:
        """Cumulative step boundaries in hours, length step_count + 1."""
        out = [0.0]
        for h in self.step_hours:
            out.append(out[-1] + h)
        return tuple(out)

    def hours_between(self, start: int, stop: int) -> float:
        """Total hours covered by steps start..stop-1."""
        return self.boundaries_hours[stop] - self.boundaries_hours[start]


@dataclass(frozen=True)
class Session:
    """One charging demand: a vehicle present on [arrival, departure).

    ``demand_kwh`` is the energy the driver asks for on top of ``init_kwh``;
    the target charge level is derived, never stored, so the three can
    never disagree.  ``tolerance`` is the driver's queueing tolerance: with
    tolerance w the driver will wait behind at most floor((1+w)N) - 1
    vehicles in the robotic-charger queue; ``math.inf`` means the driver
    always waits.  ``penalty_init_kwh``/``penalty_demand_kwh`` carry the
    original demand when the session has been clipped or re-anchored (the
    unsatisfaction penalty is always charged against the original ask).
    """

    id: int
    arrival: int
    departure: int
    demand_kwh: float
    init_kwh: float = 0.0
    max_power_kw: float = 6.6
    tolerance: float = math.inf
    preassigned_fix: bool = False
    preassigned_robo: bool = False
    penalty_init_kwh: float | None = None
    penalty_demand_kwh: float | None = None

    def __post_init__(self) -> None:
        if self.arrival < 0 or self.departure <= self.arrival:
            raise ValueError(
                f"session {self.id}: need 0 <= arrival < departure, "
                f"got [{self.arrival}, {self.departure})"
            )
        if self.demand_kwh < 0:
            raise ValueError(f"session {self.id}: negative demand")
        if self.init_kwh < 0:
            raise ValueError(f"session {self.id}: negative initial charge")
        if self.max_power_kw <= 0:
            raise ValueError(f"session {self.id}: max power must be positive")
        if self.tolerance < 0:
            raise ValueError(f"session {self.id}: negative tolerance")
        if self.preassigned_fix and self.preassigned_robo:
            raise ValueError(f"session {self.id}: preassigned to both charger types")
        if (self.preassigned_fix or self.preassigned_robo) and self.arrival != 0:
            # Preassignments describe vehicles already in service when the
            # horizon opens; a mid-horizon preassignment is meaningless.
            raise ValueError(f"session {self.id}: preassigned but arrives mid-horizon")

    @property
    def target_kwh(self) -> float:
        return self.init_kwh + self.demand_kwh

    @property
    def duration_steps(self) -> int:
        return self.departure - self.arrival

    @property
    def effective_penalty_init_kwh(self) -> float:
        return self.init_kwh if self.penalty_init_kwh is None else self.penalty_init_kwh

    @property
    def effective_penalty_demand_kwh(self) -> float:
        return self.demand_kwh if self.penalty_demand_kwh is None else self.penalty_demand_kwh


def presence_indicator(session: Session, step: int) -> int:
    """1 if the vehicle is on site during ``step``, else 0 (arrival inclusive,
    departure exclusive)."""
    return 1 if session.arrival <= step < session.departure else 0


def presence_steps(session: Session) -> range:
    return range(session.arrival, session.departure)


def clip_target(session: Session, grid: TimeGrid, efficiency: float = 1.0) -> Session:
    """Cap the session's demand at what its stay can physically deliver.

    The deliverable bound is presence hours times max power times charging
    efficiency.  The original ask is preserved in the penalty shadow fields
    the first time clipping touches a session, so repeated clipping is
    idempotent and the unsatisfaction penalty still sees the original.
    """
    if efficiency <= 0:
        raise ValueError("efficiency must be positive")
    stop = min(session.departure, grid.step_count)
    hours = grid.hours_between(session.arrival, stop) if session.arrival < stop else 0.0
    deliverable = hours * session.max_power_kw * efficiency
    if session.demand_kwh <= deliverable:
        return session
    return replace(
        session,
        demand_kwh=deliverable,
        penalty_init_kwh=session.effective_penalty_init_kwh,
        penalty_demand_kwh=session.effective_penalty_demand_kwh,
    )


@dataclass(frozen=True)
class DemandScenario:
    """A weighted bundle of sessions forming one demand realization."""

    sessions: tuple[Session, ...]
    probability: float = 1.0
    label: str = ""

    def __post_init__(self) -> None:
        if not (0.0 <= self.probability <= 1.0 + 1e-12):
            raise ValueError(f"scenario probability {self.probability} outside [0, 1]")
        ids = [s.id for s in self.sessions]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate session ids in scenario")
        order = [(s.arrival, s.id) for s in self.sessions]
        if order != sorted(order):
            raise ValueError("sessions must be sorted by (arrival, id)")

    @classmethod
    def ordered(
        cls,
        sessions: Iterable[Session],
        probability: float = 1.0,
        label: str = "",
    ) -> "DemandScenario":
        """Build a scenario from sessions in any order, re-indexing ids 0..n-1."""
        ranked = sorted(sessions, key=lambda s: (s.arrival, s.id))
        renumbered = tuple(replace(s, id=i) for i, s in enumerate(ranked))
        return cls(sessions=renumbered, probability=probability, label=label)

    def __len__(self) -> int:
        return len(self.sessions)

    def last_departure(self) -> int:
        return max((s.departure for s in self.sessions), default=0)

    def clipped(self, grid: TimeGrid, efficiency: float = 1.0) -> "DemandScenario":
        return replace(
            self,
            sessions=tuple(clip_target(s, grid, efficiency) for s in self.sessions),
        )


@dataclass(frozen=True)
class StationConfig:
    """Physical station: charger counts, background load and efficiency.

    ``base_load_kw`` is either a scalar (flat background consumption) or a
    per-step profile matching the grid it is used with.
    """

    fc_count: int
    rc_count: int
    base_load_kw: float | tuple[float, ...] = 0.0
    efficiency: float = 1.0

    def __post_init__(self) -> None:
        if self.fc_count < 0 or self.rc_count < 0:
            raise ValueError("charger counts cannot be negative")
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError("efficiency must lie in (0, 1]")
        loads = (
            (self.base_load_kw,)
            if isinstance(self.base_load_kw, (int, float))
            else self.base_load_kw
        )
        if any(b < 0 for b in loads):
            raise ValueError("base load cannot be negative")

    def base_load_profile(self, grid: TimeGrid) -> np.ndarray:
        if isinstance(self.base_load_kw, (int, float)):
            return np.full(grid.step_count, float(self.base_load_kw))
        profile = np.asarray(self.base_load_kw, dtype=float)
        if profile.shape != (grid.step_count,):
            raise ValueError(
                f"base load profile has {profile.size} entries for a "
                f"{grid.step_count}-step grid"
            )
        return profile


def default_tou(grid: TimeGrid | None = None) -> tuple[float, ...]:
    """Time-of-use tariff in cents/kWh on a quarter-hour day.

    Bands: peak 34c in 16:00-21:00, off-peak 13c in 09:00-16:00 and
    21:00-24:00, super-off-peak 11c otherwise.
    """
    grid = grid or TimeGrid.uniform()
    rates = []
    for t in range(grid.step_count):
        mid = 0.5 * (grid.boundaries_hours[t] + grid.boundaries_hours[t + 1])
        hour = mid % 24.0
        if 16.0 <= hour < 21.0:
            rates.append(34.0)
        elif 9.0 <= hour < 16.0 or 21.0 <= hour < 24.0:
            rates.append(13.0)
        else:
            rates.append(11.0)
    return tuple(rates)


@dataclass(frozen=True)
class TariffAndCosts:
    """Every price the objective touches, in the units the utility quotes.

    ``tou_cents_per_kwh`` is a per-step vector on the reference grid;
    ``demand_charge_usd_per_kw`` is the monthly (billing-cycle) rate and is
    prorated to days via ``billing_days``.  ``unsat_penalty_cents_per_kwh``
    and ``unsat_thresholds`` are parallel: tier k charges its rate on the
    positive part of threshold_k * demand - delivered.  Capital costs are
    per charger, amortized linearly over ``lifespan_years``.
    """

    tou_cents_per_kwh: tuple[float, ...] = field(default_factory=default_tou)
    fee_cents_per_kwh: float = 35.0
    demand_charge_usd_per_kw: float = 18.0
    billing_days: int = 30
    switch_cost_cents: float = 10.0
    unsat_penalty_cents_per_kwh: tuple[float, ...] = (10.0, 20.0)
    unsat_thresholds: tuple[float, ...] = (1.0, 0.9)
    capital_fc_usd: float = 5400.0
    capital_rc_usd: float = 10800.0
    lifespan_years: float = 10.0
    sr_threshold: float = 0.9
    sr_requirement: float = 0.9

    def __post_init__(self) -> None:
        if any(r < 0 for r in self.tou_cents_per_kwh):
            raise ValueError("negative time-of-use rate")
        if self.fee_cents_per_kwh < 0:
            raise ValueError("negative charging fee")
        if self.demand_charge_usd_per_kw < 0:
            raise ValueError("negative demand charge")
        if self.billing_days <= 0:
            raise ValueError("billing cycle must span at least one day")
        if self.switch_cost_cents < 0:
            raise ValueError("negative switch cost")
        if len(self.unsat_penalty_cents_per_kwh) != len(self.unsat_thresholds):
            raise ValueError("unsatisfaction tiers and thresholds differ in length")
        if any(b < 0 for b in self.unsat_penalty_cents_per_kwh):
            raise ValueError("negative unsatisfaction penalty")
        if any(not 0.0 < th <= 1.0 for th in self.unsat_thresholds):
            raise ValueError("unsatisfaction thresholds must lie in (0, 1]")
        if self.capital_fc_usd < 0 or self.capital_rc_usd < 0:
            raise ValueError("negative charger capital cost")
        if self.lifespan_years <= 0:
            raise ValueError("lifespan must be positive")
        if not 0.0 < self.sr_threshold <= 1.0:
            raise ValueError("satisfaction threshold must lie in (0, 1]")
        if not 0.0 <= self.sr_requirement <= 1.0:
            raise ValueError("satisfaction requirement must lie in [0, 1]")

    @property
    def demand_charge_cents_per_kw_day(self) -> float:
        return self.demand_charge_usd_per_kw * 100.0 / self.billing_days

    @property
    def peak_rate_cents(self) -> float:
        return max(self.tou_cents_per_kwh)

    def capex_daily_cents(self, fc_count: int, rc_count: int) -> float:
        capital = self.capital_fc_usd * fc_count + self.capital_rc_usd * rc_count
        return capital * 100.0 / (self.lifespan_years * 365.0)

    def tou_for_grid(self, grid: TimeGrid, offset_hours: float = 0.0) -> np.ndarray:
        """Map the tariff onto another grid by energy-weighted averaging.

        The stored vector is taken as a daily-periodic piecewise-constant
        rate on the uniform quarter-hour day; each target step gets the
        average rate over its own span starting at ``offset_hours``.
        """
        base = np.asarray(self.tou_cents_per_kwh, dtype=float)
        base_step = 24.0 / base.size
        out = np.empty(grid.step_count)
        for t in range(grid.step_count):
            lo = offset_hours + grid.boundaries_hours[t]
            hi = offset_hours + grid.boundaries_hours[t + 1]
            # Integrate the periodic step function over [lo, hi).
            acc = 0.0
            pos = lo
            while pos < hi - 1e-12:
                idx = int((pos % 24.0) / base_step) % base.size
                seg_end = (math.floor(pos / base_step + 1e-12) + 1) * base_step
                seg = min(seg_end, hi) - pos
                acc += base[idx] * seg
                pos += seg
            out[t] = acc / (hi - lo)
        return out


@dataclass
class Schedule:
    """Solved operating plan plus the diagnostics needed to audit it.

    Arrays are indexed [session, step]; charge arrays have one extra column
    (state on boundaries 0..T).  Queue diagnostics are per session, taken at
    that session's arrival instant.  ``assignment`` entries are one of
    ``"fix"``, ``"robo"``, ``"leave"``.
    """

    assignment: tuple[str, ...]
    plug: np.ndarray
    power_kw: np.ndarray
    curtail_kw: np.ndarray
    charge_kwh: np.ndarray
    virtual_charge_kwh: np.ndarray
    fc_queue: np.ndarray
    rc_queue: np.ndarray
    fc_vacancy: np.ndarray
    rc_vacancy: np.ndarray
    peak_power_kw: float
    disappointment_cents: np.ndarray
    objective_cents: float
    mip_gap: float = 0.0
    wall_time_s: float = 0.0
    solver_status: str = "optimal"

    @property
    def session_count(self) -> int:
        return len(self.assignment)

    @property
    def step_count(self) -> int:
        return self.plug.shape[1] if self.plug.ndim == 2 else 0

    def delivered_kwh(self, i: int, departure: int) -> float:
        return float(self.charge_kwh[i, departure] - self.charge_kwh[i, 0])

    def switch_count(self, i: int) -> int:
        """Plug transitions between consecutive steps, horizon interior only."""
        row = self.plug[i]
        return int(np.sum(row[1:] != row[:-1]))


@dataclass(frozen=True)
class CostBreakdown:
    """Additive operating-cost pieces in cents; negative opex is profit."""

    tou_cents: float = 0.0
    fee_cents: float = 0.0
    demand_cents: float = 0.0
    switch_cents: float = 0.0
    disappointment_cents: float = 0.0
    capex_cents: float = 0.0

    @property
    def opex_cents(self) -> float:
        return (
            self.tou_cents
            - self.fee_cents
            + self.demand_cents
            + self.switch_cents
            + self.disappointment_cents
        )

    @property
    def tco_cents(self) -> float:
        return self.opex_cents + self.capex_cents

    @property
    def opex_usd(self) -> float:
        return self.opex_cents / 100.0

    @property
    def tco_usd(self) -> float:
        return self.tco_cents / 100.0

    def with_capex(self, capex_cents: float) -> "CostBreakdown":
        return replace(self, capex_cents=capex_cents)
