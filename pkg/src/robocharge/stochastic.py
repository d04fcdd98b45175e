"""Demand sampling, behavioral uncertainty and forecasting.

Three uncertainty sources drive the validation runs: which sessions show
up (resampled from a historical pool), how tolerant each driver is of
queueing (a truncated normal), and when they actually unplug (a
perturbed departure).  A naive forecaster built from the same pool feeds
the rolling controller; a complete-information one replays the realized
trace and bounds what any forecaster could achieve.

All randomness flows through explicitly passed numpy generators, so a
fixed seed reproduces a whole simulated week bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .domain import DemandScenario, Session, TimeGrid
from .errors import DataError

__all__ = [
    "SessionPool",
    "BehaviorParams",
    "ArrivalEvent",
    "synthetic_pool",
    "sample_profile",
    "draw_daily_count",
    "naive_forecaster",
    "complete_information_predictor",
    "stay_decision",
    "stay_probability",
    "sample_tolerance",
    "perturb_departure",
    "demand_trace",
    "day_label",
]

STEPS_PER_DAY = 96
WEEKDAY = "weekday"
WEEKEND = "weekend"


def day_label(day: int) -> str:
    """Five weekdays then two weekend days, repeating."""
    return WEEKDAY if day % 7 < 5 else WEEKEND


@dataclass(frozen=True)
class SessionPool:
    """Historical sessions grouped by day type, with daily-count statistics.

    ``entries`` maps a label to the sessions observed on days of that
    type (arrival/departure in quarter-hour steps within one day);
    ``daily_counts`` maps the label to the empirical (mean, std) of how
    many sessions such a day brings.
    """

    entries: dict[str, tuple[Session, ...]]
    daily_counts: dict[str, tuple[float, float]]

    def __post_init__(self) -> None:
        for label, pool in self.entries.items():
            if not pool:
                raise DataError(f"session pool for {label!r} is empty")
            if label not in self.daily_counts:
                raise DataError(f"no daily-count statistics for {label!r}")

    def labels(self) -> tuple[str, ...]:
        return tuple(self.entries)


@dataclass(frozen=True)
class BehaviorParams:
    """Behavioral uncertainty knobs.

    The stay probability after finding ``v`` vacancies is
    1/(1 + a*exp(-b*v)); queueing tolerance is drawn from
    N(tolerance_mean, tolerance_std^2) truncated at zero; the actual
    departure is the registered one plus N(0, departure_std_steps^2),
    never earlier than one step after arrival.
    """

    tolerance_mean: float = 1.0
    tolerance_std: float = 0.2
    sigmoid_a: float = 2.0
    sigmoid_b: float = 2.0
    departure_std_steps: float = 1.0
    min_duration_steps: int = 1

    def __post_init__(self) -> None:
        if self.sigmoid_a <= 0 or self.sigmoid_b <= 0:
            raise DataError("sigmoid parameters must be positive")
        # std of zero is allowed: it is the deterministic toggle the
        # controller oracles rely on
        if self.tolerance_std < 0 or self.departure_std_steps < 0:
            raise DataError("spread parameters cannot be negative")
        if self.min_duration_steps < 1:
            raise DataError("minimum duration is at least one step")


@dataclass(frozen=True)
class ArrivalEvent:
    """One realized arrival in a simulated trace.

    ``session`` carries absolute step indices and the *registered*
    departure (what the driver declares on arrival and the controller
    plans with); ``actual_departure`` is when the vehicle really
    unplugs, which only the simulator knows.
    """

    session: Session
    actual_departure: int

    @property
    def step(self) -> int:
        return self.session.arrival


# -- pool construction -----------------------------------------------------


def synthetic_pool(
    rng: np.random.Generator,
    weekday_entries: int = 400,
    weekend_entries: int = 160,
    max_power_kw: float = 6.6,
) -> SessionPool:
    """Stand-in for a real ingested pool: a visitor-garage-like mix.

    Arrivals cluster around midday, stays are lognormal with a two-hour
    median, and each session asks for about half the energy its stay
    could deliver, so the slackness index of sampled days lands near
    0.5.  Daily counts follow the workplace pattern of busy weekdays and
    quiet weekends.
    """
    def draw(n: int) -> tuple[Session, ...]:
        out = []
        for i in range(n):
            a_h = float(np.clip(rng.normal(12.0, 3.5), 0.25, 21.0))
            dur_h = float(np.clip(rng.lognormal(math.log(2.0), 0.6), 0.5, 14.0))
            a = int(round(a_h * 4))
            d = min(int(round((a_h + dur_h) * 4)), STEPS_PER_DAY)
            if d <= a:
                d = a + 1
            frac = float(np.clip(rng.normal(0.5, 0.18), 0.05, 0.95))
            demand = max_power_kw * (d - a) * 0.25 * frac
            out.append(
                Session(
                    id=i,
                    arrival=a,
                    departure=d,
                    demand_kwh=demand,
                    max_power_kw=max_power_kw,
                )
            )
        return tuple(out)

    return SessionPool(
        entries={WEEKDAY: draw(weekday_entries), WEEKEND: draw(weekend_entries)},
        daily_counts={WEEKDAY: (42.9, 13.0), WEEKEND: (10.2, 4.4)},
    )


# -- sampling --------------------------------------------------------------


def sample_profile(
    pool: SessionPool, label: str, count: int, rng: np.random.Generator
) -> DemandScenario:
    """Draw ``count`` sessions of the given day type, with replacement."""
    if label not in pool.entries:
        raise DataError(f"pool has no {label!r} sessions")
    if count < 0:
        raise DataError("cannot sample a negative number of sessions")
    base = pool.entries[label]
    picks = rng.integers(0, len(base), size=count)
    return DemandScenario.ordered(
        (base[k] for k in picks), label=label
    )


def draw_daily_count(pool: SessionPool, label: str, rng: np.random.Generator) -> int:
    mean, std = pool.daily_counts[label]
    return max(0, int(round(rng.normal(mean, std))))


# -- behavioral draws ------------------------------------------------------


def stay_probability(vacancies: int, params: BehaviorParams | None = None) -> float:
    """Chance that a driver finding this many free spots decides to stay."""
    p = params or BehaviorParams()
    return 1.0 / (1.0 + p.sigmoid_a * math.exp(-p.sigmoid_b * vacancies))


def stay_decision(
    vacancies: int, rng: np.random.Generator, params: BehaviorParams | None = None
) -> bool:
    return bool(rng.random() < stay_probability(vacancies, params))


def sample_tolerance(params: BehaviorParams, rng: np.random.Generator) -> float:
    return max(0.0, float(rng.normal(params.tolerance_mean, params.tolerance_std)))


def perturb_departure(
    registered: int,
    params: BehaviorParams,
    rng: np.random.Generator,
    arrival: int,
) -> int:
    """Actual unplug step: registered plus grid-rounded noise, stay >= 1 step."""
    if registered <= arrival:
        raise DataError("registered departure must come after arrival")
    if params.departure_std_steps == 0:
        return registered
    drawn = int(round(rng.normal(registered, params.departure_std_steps)))
    return max(drawn, arrival + params.min_duration_steps)


# -- traces and forecasters ------------------------------------------------


def demand_trace(
    pool: SessionPool,
    params: BehaviorParams,
    days: int,
    rng: np.random.Generator,
) -> tuple[ArrivalEvent, ...]:
    """Realize ``days`` consecutive days of arrivals on an absolute step axis.

    Each day draws its session count from the label's statistics, then
    its sessions from the pool; every session gets a fresh tolerance and
    a perturbed actual departure.  Events come back sorted by arrival.
    """
    events: list[ArrivalEvent] = []
    for day in range(days):
        label = day_label(day)
        count = draw_daily_count(pool, label, rng)
        profile = sample_profile(pool, label, count, rng)
        base = day * STEPS_PER_DAY
        for s in profile.sessions:
            tol = sample_tolerance(params, rng)
            shifted = replace(
                s,
                id=len(events),
                arrival=base + s.arrival,
                departure=base + s.departure,
                tolerance=tol,
            )
            actual = perturb_departure(shifted.departure, params, rng, shifted.arrival)
            events.append(ArrivalEvent(session=shifted, actual_departure=actual))
    events.sort(key=lambda ev: (ev.step, ev.session.id))
    return tuple(events)


def naive_forecaster(pool: SessionPool, rng: np.random.Generator):
    """Fixed typical-day profiles, one per label, sampled once up front.

    The returned predictor, asked at absolute step ``t``, yields the
    not-yet-arrived part of the current day's typical profile shifted to
    absolute steps.  Forecast drivers always carry tolerance 1: the
    controller plans as if future arrivals were averagely patient.
    """
    typical = {
        label: sample_profile(
            pool, label, int(round(pool.daily_counts[label][0])), rng
        )
        for label in pool.labels()
    }

    def predict(t: int) -> tuple[Session, ...]:
        day, offset = divmod(t, STEPS_PER_DAY)
        base = day * STEPS_PER_DAY
        out = []
        for s in typical[day_label(day)].sessions:
            if s.arrival <= offset:
                continue
            out.append(
                replace(
                    s,
                    arrival=base + s.arrival,
                    departure=base + s.departure,
                    tolerance=1.0,
                )
            )
        return tuple(out)

    return predict


def complete_information_predictor(trace: tuple[ArrivalEvent, ...]):
    """Oracle predictor: knows every future arrival and true departure."""

    def predict(t: int) -> tuple[Session, ...]:
        return tuple(
            replace(ev.session, departure=ev.actual_departure)
            for ev in trace
            if ev.step > t
        )

    return predict
