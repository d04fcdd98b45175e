"""File formats: session CSVs, TOML configuration, and the emitted data files.

Everything written here parses back into the domain types, and the trace
writer is careful to emit only values that are reproducible under a fixed
seed (no wall times, no solver chatter), so two runs of the same seeded
simulation produce byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import warnings
from dataclasses import dataclass
from datetime import datetime

try:
    import tomllib
except ModuleNotFoundError:  # 3.10
    import tomli as tomllib

import numpy as np

from .domain import (
    DemandScenario,
    Schedule,
    Session,
    StationConfig,
    TariffAndCosts,
    TimeGrid,
    clip_target,
)
from .errors import ConfigError, DataError
from .mpc import RunResult, StepRecord
from .planning import GridCell, SweepPoint
from .stochastic import BehaviorParams, SessionPool, WEEKDAY, WEEKEND

__all__ = [
    "RunConfig",
    "ingest_sessions",
    "load_config",
    "tou_from_bands",
    "dump_pool",
    "load_pool",
    "dump_scenario",
    "load_scenario",
    "dump_schedule",
    "load_schedule",
    "write_gantt_csv",
    "write_heatmap_csv",
    "read_heatmap_csv",
    "write_sweep_csv",
    "read_sweep_csv",
    "write_trace_csv",
    "read_trace_csv",
]

STEPS_PER_DAY = 96
_INGEST_HEADER = ("start_time", "end_time", "energy_kWh")


# -- session CSV ingestion -------------------------------------------------


def _snap(ts: datetime, up: bool) -> tuple[str, int]:
    """(calendar date, step within that day), flooring or ceiling to 15 min."""
    minutes = ts.hour * 60 + ts.minute + (ts.second + ts.microsecond / 1e6) / 60.0
    step = minutes / 15.0
    snapped = math.ceil(step - 1e-9) if up else math.floor(step + 1e-9)
    return ts.date().isoformat(), int(snapped)


def ingest_sessions(path, grid: TimeGrid | None = None) -> SessionPool:
    """Read a start/end/energy session CSV into a day-typed pool.

    Arrivals floor to the quarter-hour grid and departures ceil, so a
    9:07 to 12:50 stay becomes steps 36 to 52.  Stays that run past
    midnight are cut at the end of their starting day.  Rows whose end
    does not come after their start are dropped with a warning;
    anything unparseable raises with its line number.
    """
    grid = grid or TimeGrid.uniform()
    by_label: dict[str, list[Session]] = {WEEKDAY: [], WEEKEND: []}
    day_sessions: dict[str, int] = {}
    day_type: dict[str, str] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty session file") from None
        if tuple(h.strip() for h in header) != _INGEST_HEADER:
            raise DataError(
                f"{path}: expected header {','.join(_INGEST_HEADER)}, "
                f"got {','.join(header)}"
            )
        rows = 0
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            try:
                start = datetime.fromisoformat(row[0].strip())
                end = datetime.fromisoformat(row[1].strip())
                energy = float(row[2])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            if energy < 0:
                raise DataError(f"{path}:{lineno}: negative energy {energy}")
            if end <= start:
                warnings.warn(
                    f"{path}:{lineno}: end {row[1].strip()} not after start, row dropped"
                )
                continue
            date, a = _snap(start, up=False)
            end_date, d = _snap(end, up=True)
            if end_date != date:
                d = STEPS_PER_DAY
            d = min(max(d, a + 1), STEPS_PER_DAY)
            label = WEEKDAY if start.weekday() < 5 else WEEKEND
            day_type[date] = label
            day_sessions[date] = day_sessions.get(date, 0) + 1
            session = Session(
                id=len(by_label[label]),
                arrival=a,
                departure=d,
                demand_kwh=energy,
            )
            by_label[label].append(clip_target(session, grid))
            rows += 1
        if rows == 0:
            raise DataError(f"{path}: no session rows")

    entries = {label: tuple(pool) for label, pool in by_label.items() if pool}
    counts: dict[str, tuple[float, float]] = {}
    for label in entries:
        per_day = [n for day, n in day_sessions.items() if day_type[day] == label]
        counts[label] = (float(np.mean(per_day)), float(np.std(per_day)))
    return SessionPool(entries=entries, daily_counts=counts)


# -- configuration ---------------------------------------------------------


def tou_from_bands(
    night: float,
    shoulder: float,
    peak: float,
    peak_hours: tuple[float, float] = (16.0, 21.0),
    shoulder_hours: tuple[tuple[float, float], ...] = ((9.0, 16.0), (21.0, 24.0)),
    steps: int = STEPS_PER_DAY,
) -> tuple[float, ...]:
    """Quarter-hour tariff vector from three named bands with hour ranges."""
    out = []
    step_h = 24.0 / steps
    for t in range(steps):
        h = (t + 0.5) * step_h
        if peak_hours[0] <= h < peak_hours[1]:
            out.append(float(peak))
        elif any(lo <= h < hi for lo, hi in shoulder_hours):
            out.append(float(shoulder))
        else:
            out.append(float(night))
    return tuple(out)


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs: the physical station, prices, behavior
    model, and solver budgets.  ``require_sr`` mirrors the pairing rule
    that an always-stay driver population must come with the
    satisfied-rate floor, since nobody balks at a full station."""

    station: StationConfig = StationConfig(fc_count=4, rc_count=6)
    tariff: TariffAndCosts = TariffAndCosts()
    behavior: BehaviorParams = BehaviorParams()
    require_sr: bool = False
    mip_gap: float = 0.01
    time_limit: float | None = None
    solver_options: dict | None = None


def _known_keys(table: dict, allowed, where: str) -> None:
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key {unknown[0]!r} in [{where}]")


def _check_prices(tariff: TariffAndCosts) -> None:
    flat = {
        "fee_cents_per_kwh": tariff.fee_cents_per_kwh,
        "demand_charge_usd_per_kw": tariff.demand_charge_usd_per_kw,
        "switch_cost_cents": tariff.switch_cost_cents,
        "capital_fc_usd": tariff.capital_fc_usd,
        "capital_rc_usd": tariff.capital_rc_usd,
    }
    for name, value in flat.items():
        if value < 0:
            raise ConfigError(f"negative price {name} = {value}")
    if any(r < 0 for r in tariff.tou_cents_per_kwh):
        raise ConfigError("negative time-of-use rate")
    if any(r < 0 for r in tariff.unsat_penalty_cents_per_kwh):
        raise ConfigError("negative disappointment rate")


_STATION_KEYS = ("fc_count", "rc_count", "base_load_kw", "efficiency")
_TARIFF_KEYS = (
    "tou",
    "fee_cents_per_kwh",
    "demand_charge_usd_per_kw",
    "billing_days",
    "switch_cost_cents",
    "unsat_penalty_cents_per_kwh",
    "unsat_thresholds",
    "capital_fc_usd",
    "capital_rc_usd",
    "lifespan_years",
    "sr_threshold",
    "sr_requirement",
)
_TOU_KEYS = ("night", "shoulder", "peak", "peak_hours", "shoulder_hours")
_BEHAVIOR_KEYS = (
    "tolerance_mean",
    "tolerance_std",
    "sigmoid_a",
    "sigmoid_b",
    "departure_std_steps",
    "min_duration_steps",
)
_SOLVER_KEYS = ("mip_gap", "time_limit", "options")


def load_config(path) -> RunConfig:
    """Parse a TOML run configuration; anything omitted keeps its default.

    Unknown keys are rejected rather than ignored, so a typo cannot
    silently fall back to a default.  Setting the behavior tolerance
    mean to "inf" models drivers who never balk, and switches the
    satisfied-rate floor on, since the leave law can no longer shed
    unprofitable demand.
    """
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    _known_keys(raw, ("station", "tariff", "behavior", "solver"), "")

    station_tbl = raw.get("station", {})
    _known_keys(station_tbl, _STATION_KEYS, "station")
    base = station_tbl.get("base_load_kw", 0.0)
    if isinstance(base, list):
        base = tuple(float(b) for b in base)
    defaults = RunConfig()
    try:
        station = StationConfig(
            fc_count=int(station_tbl.get("fc_count", defaults.station.fc_count)),
            rc_count=int(station_tbl.get("rc_count", defaults.station.rc_count)),
            base_load_kw=base,
            efficiency=float(station_tbl.get("efficiency", 1.0)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    tariff_tbl = dict(raw.get("tariff", {}))
    _known_keys(tariff_tbl, _TARIFF_KEYS, "tariff")
    tou_tbl = tariff_tbl.pop("tou", None)
    kwargs = {}
    for key in _TARIFF_KEYS[1:]:
        if key in tariff_tbl:
            value = tariff_tbl[key]
            if isinstance(value, list):
                value = tuple(float(v) for v in value)
            kwargs[key] = value
    if tou_tbl is not None:
        _known_keys(tou_tbl, _TOU_KEYS, "tariff.tou")
        kwargs["tou_cents_per_kwh"] = tou_from_bands(
            night=float(tou_tbl.get("night", 11.0)),
            shoulder=float(tou_tbl.get("shoulder", 13.0)),
            peak=float(tou_tbl.get("peak", 34.0)),
            peak_hours=tuple(tou_tbl.get("peak_hours", (16.0, 21.0))),
            shoulder_hours=tuple(
                tuple(pair) for pair in tou_tbl.get("shoulder_hours",
                                                    ((9.0, 16.0), (21.0, 24.0)))
            ),
        )
    tariff = dataclasses.replace(TariffAndCosts(), **kwargs)
    _check_prices(tariff)

    behavior_tbl = dict(raw.get("behavior", {}))
    _known_keys(behavior_tbl, _BEHAVIOR_KEYS, "behavior")
    require_sr = False
    if "tolerance_mean" in behavior_tbl:
        tol = behavior_tbl["tolerance_mean"]
        if isinstance(tol, str):
            if tol.lower() not in ("inf", "infinity"):
                raise ConfigError(f"tolerance_mean {tol!r} is neither a number nor inf")
            tol = math.inf
        behavior_tbl["tolerance_mean"] = float(tol)
        if math.isinf(behavior_tbl["tolerance_mean"]):
            require_sr = True
    try:
        behavior = BehaviorParams(**behavior_tbl)
    except DataError:
        raise
    except TypeError as exc:
        raise ConfigError(str(exc)) from None

    solver_tbl = raw.get("solver", {})
    _known_keys(solver_tbl, _SOLVER_KEYS, "solver")
    mip_gap = float(solver_tbl.get("mip_gap", 0.01))
    time_limit = solver_tbl.get("time_limit")
    if time_limit is not None:
        time_limit = float(time_limit)
    if mip_gap < 0:
        raise ConfigError(f"negative mip gap {mip_gap}")

    return RunConfig(
        station=station,
        tariff=tariff,
        behavior=behavior,
        require_sr=require_sr,
        mip_gap=mip_gap,
        time_limit=time_limit,
        solver_options=dict(solver_tbl.get("options", {})) or None,
    )


# -- JSON codecs for domain types ------------------------------------------


def _session_dict(s: Session) -> dict:
    out = {
        "id": s.id,
        "arrival": s.arrival,
        "departure": s.departure,
        "demand_kwh": s.demand_kwh,
    }
    if s.init_kwh:
        out["init_kwh"] = s.init_kwh
    if s.max_power_kw != 6.6:
        out["max_power_kw"] = s.max_power_kw
    if not math.isinf(s.tolerance):
        out["tolerance"] = s.tolerance
    if s.preassigned_fix:
        out["preassigned_fix"] = True
    if s.preassigned_robo:
        out["preassigned_robo"] = True
    if s.penalty_init_kwh is not None:
        out["penalty_init_kwh"] = s.penalty_init_kwh
    if s.penalty_demand_kwh is not None:
        out["penalty_demand_kwh"] = s.penalty_demand_kwh
    return out


def _session_from(d: dict) -> Session:
    return Session(
        id=int(d["id"]),
        arrival=int(d["arrival"]),
        departure=int(d["departure"]),
        demand_kwh=float(d["demand_kwh"]),
        init_kwh=float(d.get("init_kwh", 0.0)),
        max_power_kw=float(d.get("max_power_kw", 6.6)),
        tolerance=float(d.get("tolerance", math.inf)),
        preassigned_fix=bool(d.get("preassigned_fix", False)),
        preassigned_robo=bool(d.get("preassigned_robo", False)),
        penalty_init_kwh=d.get("penalty_init_kwh"),
        penalty_demand_kwh=d.get("penalty_demand_kwh"),
    )


def dump_pool(pool: SessionPool, path) -> None:
    doc = {
        label: {
            "daily_count": list(pool.daily_counts[label]),
            "sessions": [_session_dict(s) for s in pool.entries[label]],
        }
        for label in pool.entries
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_pool(path) -> SessionPool:
    with open(path) as fh:
        doc = json.load(fh)
    entries = {}
    counts = {}
    for label, body in doc.items():
        entries[label] = tuple(_session_from(d) for d in body["sessions"])
        mean, std = body["daily_count"]
        counts[label] = (float(mean), float(std))
    return SessionPool(entries=entries, daily_counts=counts)


def dump_scenario(scenario: DemandScenario, path) -> None:
    doc = {
        "label": scenario.label,
        "probability": scenario.probability,
        "sessions": [_session_dict(s) for s in scenario.sessions],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_scenario(path) -> DemandScenario:
    with open(path) as fh:
        doc = json.load(fh)
    return DemandScenario(
        sessions=tuple(_session_from(d) for d in doc["sessions"]),
        probability=float(doc.get("probability", 1.0)),
        label=doc.get("label", ""),
    )


def dump_schedule(schedule: Schedule, path) -> None:
    """Schedule as JSON, matrices row-major per session."""
    doc = {
        "assignment": list(schedule.assignment),
        "plug": schedule.plug.astype(int).tolist(),
        "power_kw": schedule.power_kw.tolist(),
        "curtail_kw": schedule.curtail_kw.tolist(),
        "charge_kwh": schedule.charge_kwh.tolist(),
        "virtual_charge_kwh": schedule.virtual_charge_kwh.tolist(),
        "fc_queue": schedule.fc_queue.tolist(),
        "rc_queue": schedule.rc_queue.tolist(),
        "fc_vacancy": schedule.fc_vacancy.tolist(),
        "rc_vacancy": schedule.rc_vacancy.tolist(),
        "peak_power_kw": schedule.peak_power_kw,
        "disappointment_cents": schedule.disappointment_cents.tolist(),
        "objective_cents": schedule.objective_cents,
        "mip_gap": schedule.mip_gap,
        "solver_status": schedule.solver_status,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_schedule(path) -> Schedule:
    with open(path) as fh:
        doc = json.load(fh)
    steps = len(doc["plug"][0]) if doc["plug"] else 0
    boundaries = steps + 1 if steps else 0

    def arr(key, dtype=float, width=steps):
        raw = doc[key]
        if not raw:
            return np.zeros((0, width) if isinstance(raw, list) else 0, dtype=dtype)
        return np.asarray(raw, dtype=dtype)

    return Schedule(
        assignment=tuple(doc["assignment"]),
        plug=arr("plug", dtype=bool),
        power_kw=arr("power_kw"),
        curtail_kw=arr("curtail_kw"),
        charge_kwh=arr("charge_kwh", width=boundaries),
        virtual_charge_kwh=arr("virtual_charge_kwh", width=boundaries),
        fc_queue=np.asarray(doc["fc_queue"], dtype=float),
        rc_queue=np.asarray(doc["rc_queue"], dtype=float),
        fc_vacancy=np.asarray(doc["fc_vacancy"], dtype=float),
        rc_vacancy=np.asarray(doc["rc_vacancy"], dtype=float),
        peak_power_kw=float(doc["peak_power_kw"]),
        disappointment_cents=np.asarray(doc["disappointment_cents"], dtype=float),
        objective_cents=float(doc["objective_cents"]),
        mip_gap=float(doc.get("mip_gap", 0.0)),
        solver_status=doc.get("solver_status", "optimal"),
    )


# -- delimited data products -----------------------------------------------


def write_gantt_csv(schedule: Schedule, scenario: DemandScenario, path) -> None:
    """Per-session presence rows: who was plugged where, at what power."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["id", "step", "plugged", "power_kW", "charge_kWh", "charger_type"])
        for i, s in enumerate(scenario.sessions):
            for t in range(s.arrival, s.departure):
                out.writerow([
                    s.id,
                    t,
                    int(schedule.plug[i, t]),
                    repr(float(schedule.power_kw[i, t])),
                    repr(float(schedule.charge_kwh[i, t + 1])),
                    schedule.assignment[i],
                ])


def write_heatmap_csv(cells, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["M", "N", "TCO_daily_usd", "OPEX_daily_usd", "SR",
                      "capex_daily_usd"])
        for c in cells:
            out.writerow([
                c.fc_count,
                c.rc_count,
                repr(c.tco_cents / 100.0),
                repr(c.opex_cents / 100.0),
                repr(c.satisfied),
                repr(c.capex_cents / 100.0),
            ])


def read_heatmap_csv(path) -> tuple[GridCell, ...]:
    cells = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            cells.append(
                GridCell(
                    fc_count=int(row["M"]),
                    rc_count=int(row["N"]),
                    tco_cents=float(row["TCO_daily_usd"]) * 100.0,
                    opex_cents=float(row["OPEX_daily_usd"]) * 100.0,
                    satisfied=float(row["SR"]),
                    capex_cents=float(row["capex_daily_usd"]) * 100.0,
                    solver_status="imported",
                )
            )
    return tuple(cells)


def write_sweep_csv(points, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["index", "value", "achieved", "fc_count", "rc_count",
                      "TCO_daily_usd", "FC_only_TCO_daily_usd",
                      "RC_only_TCO_daily_usd"])
        for p in points:
            out.writerow([
                p.index,
                repr(p.value),
                repr(p.achieved),
                p.fc_count,
                p.rc_count,
                repr(p.tco_cents / 100.0),
                repr(p.fc_only_tco_cents / 100.0),
                repr(p.rc_only_tco_cents / 100.0),
            ])


def read_sweep_csv(path) -> tuple[SweepPoint, ...]:
    points = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            points.append(
                SweepPoint(
                    index=row["index"],
                    value=float(row["value"]),
                    achieved=float(row["achieved"]),
                    fc_count=int(row["fc_count"]),
                    rc_count=int(row["rc_count"]),
                    tco_cents=float(row["TCO_daily_usd"]) * 100.0,
                    fc_only_tco_cents=float(row["FC_only_TCO_daily_usd"]) * 100.0,
                    rc_only_tco_cents=float(row["RC_only_TCO_daily_usd"]) * 100.0,
                )
            )
    return tuple(points)


_TRACE_HEADER = ["step", "vehicle_id", "event", "power_kW", "plugged",
                 "peak_floor_kW", "aggregate_kW"]


def write_trace_csv(result: RunResult, path) -> None:
    """Step-indexed execution log of a rolling run.

    One row per onsite vehicle per step, preceded by rows for vehicles
    that departed or were turned away at that step.  Only seeded-
    reproducible quantities appear: solver statuses and timings stay
    out, so fixed-seed runs serialize identically.
    """
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(_TRACE_HEADER)
        for rec in result.records:
            floor = repr(float(rec.peak_floor_kw))
            agg = repr(float(rec.aggregate_kw))
            for vid in rec.departed:
                out.writerow([rec.step, vid, "depart", repr(0.0), 0, floor, agg])
            for vid in rec.refused:
                out.writerow([rec.step, vid, "refused", repr(0.0), 0, floor, agg])
            for vid in sorted(rec.powers_kw):
                event = "arrive" if vid in rec.admitted else ""
                out.writerow([
                    rec.step,
                    vid,
                    event,
                    repr(float(rec.powers_kw[vid])),
                    int(rec.plugs.get(vid, False)),
                    floor,
                    agg,
                ])


def read_trace_csv(path) -> tuple[StepRecord, ...]:
    records: dict[int, StepRecord] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            t = int(row["step"])
            rec = records.get(t)
            if rec is None:
                rec = StepRecord(
                    step=t,
                    powers_kw={},
                    plugs={},
                    peak_floor_kw=float(row["peak_floor_kW"]),
                    aggregate_kw=float(row["aggregate_kW"]),
                )
                records[t] = rec
            vid = int(row["vehicle_id"])
            event = row["event"]
            if event == "depart":
                rec.departed = rec.departed + (vid,)
            elif event == "refused":
                rec.refused = rec.refused + (vid,)
            else:
                if event == "arrive":
                    rec.admitted = rec.admitted + (vid,)
                rec.powers_kw[vid] = float(row["power_kW"])
                rec.plugs[vid] = bool(int(row["plugged"]))
    return tuple(records[t] for t in sorted(records))
