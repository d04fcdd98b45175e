"""Random instance factories shared by the operation and acceptance tests.

The "quantized" family keeps every demand an exact multiple of the energy
one step of full power delivers, and turns off the demand charge and the
disappointment penalties.  On that family the optimum is attained on the
{0, full power} grid, so exhaustive enumeration over that grid is a true
optimum oracle for the continuous model.  The "full cost" family turns
everything back on; there the enumeration is only a feasible subset, so
comparisons must be one-sided.
"""

from __future__ import annotations

import math

import numpy as np

from robocharge.domain import DemandScenario, Session, StationConfig, TariffAndCosts, TimeGrid

RATE_CHOICES = (11.0, 13.0, 34.0)
STATION_CHOICES = ((1, 1), (2, 1), (1, 2), (1, 0), (2, 0))
TOLERANCE_CHOICES = (0.0, 0.5, 1.0, math.inf)


def quantized_instance(rng: np.random.Generator, *, steps: int = 4, step_hours: float = 0.5,
                       max_sessions: int = 3, full_cost: bool = False):
    """One random tiny instance; returns (scenario, station, tariff, grid, tolerance)."""
    grid = TimeGrid.uniform(steps=steps, step_hours=step_hours)
    quantum = 6.6 * step_hours
    n = int(rng.integers(1, max_sessions + 1))
    sessions = []
    for i in range(n):
        a = int(rng.integers(0, steps - 1))
        d = int(rng.integers(a + 1, min(a + 3, steps) + 1))
        demand = quantum * int(rng.integers(0, d - a + 1))
        sessions.append(Session(id=i, arrival=a, departure=d, demand_kwh=demand))
    scenario = DemandScenario.ordered(tuple(sessions))
    m, n_rc = STATION_CHOICES[int(rng.integers(0, len(STATION_CHOICES)))]
    station = StationConfig(fc_count=m, rc_count=n_rc)
    tou = tuple(float(rng.choice(RATE_CHOICES)) for _ in range(steps))
    tariff = TariffAndCosts(
        tou_cents_per_kwh=tou,
        fee_cents_per_kwh=35.0,
        demand_charge_usd_per_kw=18.0 if full_cost else 0.0,
        switch_cost_cents=float(rng.choice((0.0, 10.0))),
        unsat_penalty_cents_per_kwh=(10.0, 20.0) if full_cost else (0.0, 0.0),
    )
    tolerance = TOLERANCE_CHOICES[int(rng.integers(0, len(TOLERANCE_CHOICES)))]
    return scenario, station, tariff, grid, tolerance
