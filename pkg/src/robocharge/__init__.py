"""Scheduling, sizing and stochastic validation for mixed-charger EV stations.

The package models a station that mixes fixed chargers (one cable, one bay)
with robotic chargers that shuttle between vehicles, decides day-ahead
operating schedules and charger counts by mixed-integer programming, and
stress-tests the resulting plans in a receding-horizon simulation with
random driver behavior.
"""

from .domain import (
    CostBreakdown,
    DemandScenario,
    Schedule,
    Session,
    StationConfig,
    TariffAndCosts,
    TimeGrid,
    clip_target,
    presence_indicator,
)
from .errors import ConfigError, DataError, RobochargeError, SolverError

__all__ = [
    "CostBreakdown",
    "DemandScenario",
    "Schedule",
    "Session",
    "StationConfig",
    "TariffAndCosts",
    "TimeGrid",
    "clip_target",
    "presence_indicator",
    "ConfigError",
    "DataError",
    "RobochargeError",
    "SolverError",
]

__version__ = "0.1.0"
