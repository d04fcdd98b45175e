"""Daily operation scheduling for a mixed fixed/robotic charger station.

The model decides, per charging session, whether the driver is served by a
fixed charger (plugged for the whole stay), by a robotic charger (plugged
only while it actually charges), or ends up leaving because neither kind
has a vacancy the driver tolerates.  Leaving is not a decision the station
makes: it follows mechanically from queue lengths at the arrival instant,
which is what the queue block encodes.

Besides the MILP there are three independent replays of the same
semantics: a feasibility validator, a cost repricer and an exhaustive
brute-force search used as the test oracle.  None of them look at the
model; they only look at schedules and data.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .domain import (
    CostBreakdown,
    DemandScenario,
    Schedule,
    Session,
    StationConfig,
    TariffAndCosts,
    TimeGrid,
    presence_indicator,
)
from .errors import ConfigError, DataError, SolverError
from .milp import (
    LinExpr,
    Model,
    Variable,
    lin_sum,
    linearize_and,
    linearize_leave_rule,
    linearize_pos_part,
    linearize_shortfall_indicator,
    solve,
)

__all__ = [
    "OperationOptions",
    "OperationModelBuilder",
    "Violation",
    "solve_operation",
    "validate_schedule",
    "reprice",
    "brute_force_operation",
    "queue_capacity",
    "replay_queue",
]


@dataclass(frozen=True)
class OperationOptions:
    """Behavioral and accounting knobs for one operation solve.

    ``tolerance_override`` replaces every session's queueing tolerance
    (a mapping overrides per session id).  ``queue`` selects the queue
    machinery: "auto" drops it only when every driver always stays and at
    least one robotic charger exists (where it provably never binds),
    "on"/"off" force the choice.  ``demand_charge_floor_kw`` is the peak
    already committed earlier in the billing cycle; ``horizon_days``
    scales the prorated demand charge (defaults to grid hours / 24).
    ``tou_offset_hours`` re-anchors the daily tariff when the grid does
    not start at midnight.
    """

    tolerance_override: float | dict[int, float] | None = None
    queue: str = "auto"
    demand_charge_floor_kw: float = 0.0
    horizon_days: float | None = None
    tou_offset_hours: float | None = None
    shortfall_eps_kwh: float = 1e-3

    def resolve_tolerance(self, session: Session) -> float:
        if self.tolerance_override is None:
            return session.tolerance
        if isinstance(self.tolerance_override, dict):
            return self.tolerance_override.get(session.id, session.tolerance)
        return float(self.tolerance_override)


def queue_capacity(tolerance: float, rc_count: int, session_count: int) -> int:
    """Longest robotic-charger queue a driver with this tolerance accepts.

    floor((1 + tolerance) * rc_count); an infinitely tolerant driver gets
    the session count itself (an unreachable bound) as long as at least
    one robotic charger exists, else 0.
    """
    if rc_count <= 0:
        return 0
    if math.isinf(tolerance):
        return session_count
    return int(math.floor((1.0 + tolerance) * rc_count + 1e-9))


def _tou_vector(tariff: TariffAndCosts, grid: TimeGrid, options: OperationOptions) -> np.ndarray:
    if options.tou_offset_hours is not None:
        return tariff.tou_for_grid(grid, offset_hours=options.tou_offset_hours)
    if len(tariff.tou_cents_per_kwh) == grid.step_count:
        return np.asarray(tariff.tou_cents_per_kwh, dtype=float)
    return tariff.tou_for_grid(grid, offset_hours=0.0)


class OperationModelBuilder:
    """Assembles the operation MILP block by block."""

    def __init__(
        self,
        scenario: DemandScenario,
        station: StationConfig,
        tariff: TariffAndCosts,
        grid: TimeGrid | None = None,
        options: OperationOptions | None = None,
        model: Model | None = None,
    ):
        self.grid = grid or TimeGrid.uniform()
        self.scenario = scenario
        self.station = station
        self.tariff = tariff
        self.options = options or OperationOptions()
        self.sessions = scenario.sessions
        # sharing one model across several builders lets a caller couple
        # scenario replicas through its own variables (sizing, recourse)
        self.model = model if model is not None else Model(name="operation")

        T = self.grid.step_count
        eta = station.efficiency
        for s in self.sessions:
            if s.departure > T:
                raise DataError(f"session {s.id} departs at step {s.departure} > horizon {T}")
            hours = self.grid.hours_between(s.arrival, s.departure)
            if s.demand_kwh > hours * s.max_power_kw * eta + 1e-6:
                raise DataError(
                    f"session {s.id} asks {s.demand_kwh:.3f} kWh but its stay can "
                    f"deliver only {hours * s.max_power_kw * eta:.3f}; clip the scenario first"
                )
        if sum(s.preassigned_fix for s in self.sessions) > station.fc_count:
            raise DataError("more sessions preassigned to fixed chargers than chargers exist")
        if any(s.preassigned_robo for s in self.sessions) and station.rc_count == 0:
            raise DataError("session preassigned to a robotic charger but none exist")

        self.tolerances = [self.options.resolve_tolerance(s) for s in self.sessions]
        self.base_load = station.base_load_profile(self.grid)
        self.tou = _tou_vector(tariff, self.grid, self.options)
        self.dt = np.asarray(self.grid.step_hours)

        queue_mode = self.options.queue
        all_patient = all(math.isinf(w) for w in self.tolerances)
        if queue_mode == "off" and not (all_patient and station.rc_count >= 1):
            raise ConfigError(
                "queue machinery can only be dropped when every driver always "
                "stays and at least one robotic charger exists"
            )
        if queue_mode == "auto":
            queue_mode = "off" if (all_patient and station.rc_count >= 1) else "on"
        self.queue_enabled = queue_mode == "on"

        # variable handles, filled in by the blocks
        self.assign_fix: list[Variable] = []
        self.assign_robo: list[Variable] = []
        self.leave: list[Variable] = []
        self.plug: list[dict[int, Variable]] = []
        self.power: list[dict[int, Variable]] = []
        self.curtail: list[dict[int, Variable]] = []
        self.charge: list[dict[int, Variable]] = []
        self.virtual: list[dict[int, Variable]] = []
        self.fc_queue: list[LinExpr] = []
        self.rc_queue: list[LinExpr] = []
        self.fc_vacancy: list[LinExpr] = []
        self.rc_vacancy: list[LinExpr] = []
        self.queue_caps: list[int] = []
        self.peak: Variable | None = None
        self.switches: list[dict[int, Variable]] = []
        self.shortfall_tiers: list[list[Variable]] = []
        self._built = False

    # -- helpers -----------------------------------------------------------

    def plug_expr(self, i: int, t: int):
        return self.plug[i].get(t, 0.0)

    def charge_expr(self, i: int, t: int):
        """Charge state of session i at boundary t, clamped outside its stay."""
        s = self.sessions[i]
        if t <= s.arrival:
            return s.init_kwh
        t = min(t, s.departure)
        return self.charge[i][t]

    def virtual_expr(self, i: int, t: int):
        s = self.sessions[i]
        if t <= s.arrival:
            return s.init_kwh
        t = min(t, s.departure)
        return self.virtual[i][t]

    # -- blocks ------------------------------------------------------------

    def add_assignment_block(self) -> None:
        """Charger-type choice, plug windows and seat capacities."""
        m = self.model
        M, N = self.station.fc_count, self.station.rc_count
        for i, s in enumerate(self.sessions):
            xf = m.add_binary(name=f"fix[{s.id}]")
            xr = m.add_binary(name=f"robo[{s.id}]")
            xl = m.add_binary(name=f"leave[{s.id}]")
            self.assign_fix.append(xf)
            self.assign_robo.append(xr)
            self.leave.append(xl)
            m.add(lin_sum([xf, xr, xl]), "==", 1, name=f"one_outcome[{s.id}]")
            if N == 0:
                m.fix(xr, 0)
            if s.preassigned_fix:
                m.add(xf, ">=", 1, name=f"keep_fix[{s.id}]")
            if s.preassigned_robo:
                m.add(xr, ">=", 1, name=f"keep_robo[{s.id}]")
            if not self.queue_enabled:
                m.fix(xl, 0)

            row: dict[int, Variable] = {}
            for t in range(s.arrival, s.departure):
                u = m.add_binary(name=f"plug[{s.id},{t}]")
                # fixed chargers stay plugged the whole stay; nobody who
                # leaves occupies anything
                m.add(u, ">=", xf, name=f"plug_ge_fix[{s.id},{t}]")
                m.add(LinExpr.of(u) + xl, "<=", 1, name=f"plug_gate[{s.id},{t}]")
                row[t] = u
            self.plug.append(row)

        for t in range(self.grid.step_count):
            fixed_here = [
                self.assign_fix[i]
                for i, s in enumerate(self.sessions)
                if presence_indicator(s, t)
            ]
            if fixed_here and M < len(fixed_here):
                m.add(lin_sum(fixed_here), "<=", M, name=f"fc_cap[{t}]")
            robo_plugged = [
                LinExpr.of(self.plug[i][t]) - LinExpr.of(self.assign_fix[i])
                for i, s in enumerate(self.sessions)
                if presence_indicator(s, t)
            ]
            if robo_plugged and N < len(robo_plugged):
                m.add(lin_sum(robo_plugged), "<=", N, name=f"rc_cap[{t}]")

    def add_energy_block(self) -> None:
        """Power, real charge and demand-completion (virtual) charge."""
        m = self.model
        eta = self.station.efficiency
        for i, s in enumerate(self.sessions):
            p_row: dict[int, Variable] = {}
            c_row: dict[int, Variable] = {}
            e_row: dict[int, Variable] = {}
            v_row: dict[int, Variable] = {}
            self.power.append(p_row)
            self.curtail.append(c_row)
            self.charge.append(e_row)
            self.virtual.append(v_row)
            for t in range(s.arrival, s.departure):
                p = m.add_continuous(0.0, s.max_power_kw, name=f"p[{s.id},{t}]")
                q = m.add_continuous(0.0, s.max_power_kw, name=f"pc[{s.id},{t}]")
                m.add(p, "<=", s.max_power_kw * LinExpr.of(self.plug[i][t]), name=f"p_plug[{s.id},{t}]")
                m.add(LinExpr.of(p) + q, "<=", s.max_power_kw, name=f"p_tot[{s.id},{t}]")
                p_row[t] = p
                c_row[t] = q
            for t in range(s.arrival + 1, s.departure + 1):
                e = m.add_continuous(s.init_kwh, s.target_kwh, name=f"e[{s.id},{t}]")
                v = m.add_continuous(s.init_kwh, s.target_kwh, name=f"ev[{s.id},{t}]")
                step = self.dt[t - 1] * eta
                m.add(
                    LinExpr.of(e) - self.charge_expr(i, t - 1) - step * LinExpr.of(p_row[t - 1]),
                    "==",
                    0.0,
                    name=f"e_rec[{s.id},{t}]",
                )
                e_row[t] = e
                v_row[t] = v
                m.add(
                    LinExpr.of(v)
                    - self.virtual_expr(i, t - 1)
                    - step * (LinExpr.of(p_row[t - 1]) + c_row[t - 1]),
                    "==",
                    0.0,
                    name=f"ev_rec[{s.id},{t}]",
                )
            # the virtual trajectory must finish the (possibly clipped)
            # demand unless the driver left
            m.add(
                LinExpr.of(v_row[s.departure]) + s.demand_kwh * LinExpr.of(self.leave[i]),
                "==",
                s.target_kwh,
                name=f"complete[{s.id}]",
            )

    def add_queue_block(self) -> None:
        """Arrival-time queue lengths, vacancies and the leave-or-wait law."""
        m = self.model
        M, N = self.station.fc_count, self.station.rc_count
        I = len(self.sessions)
        eps = self.options.shortfall_eps_kwh

        for i, s in enumerate(self.sessions):
            cap = queue_capacity(self.tolerances[i], N, I)
            self.queue_caps.append(cap)
            ahead = [
                j
                for j in range(i)
                if presence_indicator(self.sessions[j], s.arrival)
            ]
            qfix = lin_sum(self.assign_fix[j] for j in ahead)
            self.fc_queue.append(qfix)
            vfix = LinExpr.of(float(M)) - qfix
            self.fc_vacancy.append(vfix)

            if not self.queue_enabled:
                # queue dropped: diagnostics are recomputed procedurally
                # after the solve, nothing to constrain here
                self.rc_queue.append(LinExpr())
                self.rc_vacancy.append(LinExpr.of(float(cap)))
                continue

            if N >= 1 and math.isinf(self.tolerances[i]):
                # an always-stay driver's cap equals I, which the at most
                # I-1 arrivals ahead can never fill, so the leave rule is
                # vacuous for this session and needs no machinery
                m.fix(self.leave[i], 0)
                self.rc_queue.append(LinExpr())
                self.rc_vacancy.append(LinExpr.of(float(cap)))
                continue

            rc_members = []
            if N >= 1:
                probe = s.arrival - 1
                for j in ahead:
                    other = self.sessions[j]
                    shortfall = LinExpr.of(other.target_kwh) - self.charge_expr(j, probe)
                    if not shortfall.terms:
                        # constant shortfall (probe before the other's stay
                        # started): the indicator is data, not a variable;
                        # same half-band threshold as the procedural replay
                        if shortfall.constant >= 0.5 * eps:
                            rc_members.append(LinExpr.of(self.assign_robo[j]))
                        continue
                    if other.demand_kwh <= eps:
                        continue  # can never fall noticeably short
                    z = linearize_shortfall_indicator(
                        m,
                        shortfall,
                        bound=other.demand_kwh,
                        eps=eps,
                        name=f"unfinished[{other.id}@{s.id}]",
                    )
                    w = linearize_and(
                        m, self.assign_robo[j], z, name=f"queued[{other.id}@{s.id}]"
                    )
                    rc_members.append(LinExpr.of(w))
            qrobo = lin_sum(rc_members)
            self.rc_queue.append(qrobo)

            if not rc_members:
                vrobo = LinExpr.of(float(cap))
            elif cap == 0:
                # deficit can only be <= 0; its positive part is just 0
                vrobo = LinExpr()
            else:
                vrobo_var = linearize_pos_part(
                    m,
                    LinExpr.of(float(cap)) - qrobo,
                    bound=float(cap + len(rc_members)),
                    name=f"rc_vac[{s.id}]",
                )
                vrobo = LinExpr.of(vrobo_var)
            self.rc_vacancy.append(vrobo)

            vmax = M + cap
            vsum = vfix + vrobo
            if vmax < 1:
                # no seat can ever be free: the driver must leave
                m.fix(self.leave[i], 1)
            else:
                linearize_leave_rule(
                    m, vsum, vmax=float(vmax), name=f"leave_rule[{s.id}]", var=self.leave[i]
                )
                # per-type gates: leaving requires both vacancy counts to be
                # zero; same integer feasible set as the joint gate above but
                # a much tighter relaxation
                if M >= 1:
                    m.add(
                        vfix,
                        "<=",
                        M * (1.0 - LinExpr.of(self.leave[i])),
                        name=f"leave_gate_fix[{s.id}]",
                    )
                if cap >= 1:
                    m.add(
                        vrobo,
                        "<=",
                        cap * (1.0 - LinExpr.of(self.leave[i])),
                        name=f"leave_gate_robo[{s.id}]",
                    )

    def cost_parts(self) -> dict[str, LinExpr]:
        """Operating-cost pieces: energy margin, demand charge, switching,
        disappointment.  Creates the peak, switch and shortfall-slack
        variables as a side effect; the sum of the four parts is this
        scenario's daily operating cost in cents.  Split out so a caller
        weighting several scenario replicas can combine them itself.
        """
        m = self.model

        margin_terms = []
        for i, s in enumerate(self.sessions):
            for t, p in self.power[i].items():
                coef = (self.tou[t] - self.tariff.fee_cents_per_kwh) * self.dt[t]
                if coef:
                    margin_terms.append(coef * LinExpr.of(p))

        horizon_days = (
            self.options.horizon_days
            if self.options.horizon_days is not None
            else self.grid.total_hours / 24.0
        )
        dc_coeff = self.tariff.demand_charge_cents_per_kw_day * horizon_days
        peak = m.add_continuous(
            lb=max(self.options.demand_charge_floor_kw, 0.0), name="billed_peak"
        )
        self.peak = peak
        for t in range(self.grid.step_count):
            drawing = [self.power[i][t] for i, s in enumerate(self.sessions) if t in self.power[i]]
            m.add(
                LinExpr.of(peak),
                ">=",
                lin_sum(drawing) + float(self.base_load[t]),
                name=f"peak[{t}]",
            )

        # switch indicators can stay continuous: with a nonnegative price
        # they settle at |plug_{t+1} - plug_t| themselves, and that is 0/1
        # whenever the plug statuses are
        switch_terms = []
        beta_sw = self.tariff.switch_cost_cents
        T = self.grid.step_count
        for i, s in enumerate(self.sessions):
            row: dict[int, Variable] = {}
            if beta_sw:
                for t in range(max(s.arrival - 1, 0), min(s.departure, T - 1)):
                    # plug transition between steps t and t+1 (interior only)
                    diff = LinExpr.of(self.plug_expr(i, t + 1)) - self.plug_expr(i, t)
                    sw = m.add_continuous(0.0, 1.0, name=f"switch[{s.id},{t}]")
                    m.add(sw, ">=", diff, name=f"sw_up[{s.id},{t}]")
                    m.add(sw, ">=", -diff, name=f"sw_dn[{s.id},{t}]")
                    row[t] = sw
                    switch_terms.append(beta_sw * LinExpr.of(sw))
            self.switches.append(row)

        unsat_terms = []
        thresholds = self.tariff.unsat_thresholds
        rates = self.tariff.unsat_penalty_cents_per_kwh
        for i, s in enumerate(self.sessions):
            tiers: list[Variable] = []
            demand = s.effective_penalty_demand_kwh
            if demand > 0:
                delivered = (
                    LinExpr.of(self.charge_expr(i, s.departure)) - s.effective_penalty_init_kwh
                )
                for k, (theta, rate) in enumerate(zip(thresholds, rates)):
                    slack = m.add_continuous(0.0, name=f"unsat[{s.id},{k}]")
                    m.add(
                        LinExpr.of(slack),
                        ">=",
                        theta * demand
                        - delivered
                        - theta * demand * LinExpr.of(self.leave[i]),
                        name=f"unsat_def[{s.id},{k}]",
                    )
                    tiers.append(slack)
                    if rate:
                        unsat_terms.append(rate * LinExpr.of(slack))
            self.shortfall_tiers.append(tiers)

        return {
            "margin": lin_sum(margin_terms),
            "demand": dc_coeff * LinExpr.of(peak),
            "switch": lin_sum(switch_terms),
            "unsat": lin_sum(unsat_terms),
        }

    def add_cost_block(self) -> None:
        """Objective: energy margin, demand charge, switching, disappointment."""
        parts = self.cost_parts()
        self.model.set_objective(
            parts["margin"] + parts["demand"] + parts["switch"] + parts["unsat"]
        )

    def build(self) -> "OperationModelBuilder":
        if self._built:
            return self
        self.add_assignment_block()
        self.add_energy_block()
        self.add_queue_block()
        self.add_cost_block()
        self._built = True
        return self

    # -- extraction --------------------------------------------------------

    def extract(self, result) -> Schedule:
        I, T = len(self.sessions), self.grid.step_count
        plug = np.zeros((I, T), dtype=np.int8)
        power = np.zeros((I, T))
        curtail = np.zeros((I, T))
        charge = np.zeros((I, T + 1))
        virtual = np.zeros((I, T + 1))
        assignment = []
        for i, s in enumerate(self.sessions):
            for t, var in self.plug[i].items():
                plug[i, t] = int(result.value(var) > 0.5)
            for t, var in self.power[i].items():
                power[i, t] = max(result.value(var), 0.0)
            for t, var in self.curtail[i].items():
                curtail[i, t] = max(result.value(var), 0.0)
            charge[i, : s.arrival + 1] = s.init_kwh
            virtual[i, : s.arrival + 1] = s.init_kwh
            for t in range(s.arrival + 1, s.departure + 1):
                charge[i, t] = result.value(self.charge[i][t])
                virtual[i, t] = result.value(self.virtual[i][t])
            charge[i, s.departure:] = charge[i, s.departure]
            virtual[i, s.departure:] = virtual[i, s.departure]
            if result.value(self.leave[i]) > 0.5:
                assignment.append("leave")
            elif result.value(self.assign_fix[i]) > 0.5:
                assignment.append("fix")
            else:
                assignment.append("robo")

        # queue diagnostics always come from the procedural replay: it is
        # the law the validator checks against, and unlike the model
        # expressions it exists whether or not the queue block was built
        fc_q, rc_q, fc_v, rc_v, _ = replay_queue(
            self.sessions,
            assignment,
            charge,
            self.station.fc_count,
            self.station.rc_count,
            self.tolerances,
            eps=self.options.shortfall_eps_kwh,
        )

        disapp = np.zeros(I)
        rates = self.tariff.unsat_penalty_cents_per_kwh
        for i, tiers in enumerate(self.shortfall_tiers):
            disapp[i] = sum(r * result.value(v) for r, v in zip(rates, tiers))

        return Schedule(
            assignment=tuple(assignment),
            plug=plug,
            power_kw=power,
            curtail_kw=curtail,
            charge_kwh=charge,
            virtual_charge_kwh=virtual,
            fc_queue=fc_q,
            rc_queue=rc_q,
            fc_vacancy=fc_v,
            rc_vacancy=rc_v,
            peak_power_kw=result.value(self.peak),
            disappointment_cents=disapp,
            objective_cents=result.objective,
            mip_gap=result.mip_gap,
            wall_time_s=result.wall_time_s,
            solver_status=result.status,
        )


def solve_operation(
    scenario: DemandScenario,
    station: StationConfig,
    tariff: TariffAndCosts,
    grid: TimeGrid | None = None,
    options: OperationOptions | None = None,
    mip_gap: float = 0.01,
    time_limit: float | None = None,
    solver_options: dict | None = None,
) -> tuple[Schedule, CostBreakdown]:
    """Build, solve and account one day of operation.

    Returns the schedule and its independently repriced cost breakdown.
    Raises SolverError when the model comes back infeasible (consistent
    inputs cannot be: leaving is always an admissible outcome) or when no
    incumbent exists within the time limit.
    """
    builder = OperationModelBuilder(scenario, station, tariff, grid, options).build()
    result = solve(
        builder.model, mip_gap=mip_gap, time_limit=time_limit, solver_options=solver_options
    )
    if result.status == "infeasible":
        raise SolverError(
            "operation model infeasible; check preassignments against charger counts"
        )
    if not result.ok:
        raise SolverError(f"no incumbent within limits: {result.message}")
    schedule = builder.extract(result)
    breakdown = reprice(schedule, scenario, station, tariff, builder.grid, builder.options)
    return schedule, breakdown


# -- procedural replays ----------------------------------------------------


def replay_queue(
    sessions: tuple[Session, ...],
    assignment,
    charge: np.ndarray,
    fc_count: int,
    rc_count: int,
    tolerances,
    eps: float = 1e-3,
):
    """Recompute queues, vacancies and the leave law from a schedule.

    Walks sessions in arrival order; for each, counts fixed-charger
    occupants among earlier arrivals still on site, and robotic-charger
    customers still short of their target at the step before this arrival.
    A shortfall counts once it clears half of ``eps``: feasible schedules
    sit either at 0 or at >= eps, so probing the middle of the dead band
    keeps the count stable under solver-tolerance noise.
    Returns (fc_queue, rc_queue, fc_vacancy, rc_vacancy, must_leave).
    """
    I = len(sessions)
    fc_q = np.zeros(I, dtype=int)
    rc_q = np.zeros(I, dtype=int)
    fc_v = np.zeros(I, dtype=int)
    rc_v = np.zeros(I, dtype=int)
    must_leave = np.zeros(I, dtype=bool)
    for i, s in enumerate(sessions):
        cap = queue_capacity(tolerances[i], rc_count, I)
        probe = max(s.arrival - 1, 0)
        nf = nr = 0
        for j in range(i):
            if not presence_indicator(sessions[j], s.arrival):
                continue
            if assignment[j] == "fix":
                nf += 1
            elif assignment[j] == "robo":
                if sessions[j].target_kwh - charge[j, probe] >= 0.5 * eps:
                    nr += 1
        fc_q[i], rc_q[i] = nf, nr
        fc_v[i] = fc_count - nf
        rc_v[i] = max(cap - nr, 0)
        must_leave[i] = fc_v[i] + rc_v[i] <= 0
    return fc_q, rc_q, fc_v, rc_v, must_leave


@dataclass(frozen=True)
class Violation:
    """One feasibility defect found by the validator."""

    kind: str
    session: int | None = None
    step: int | None = None
    message: str = ""

    def __str__(self) -> str:
        where = []
        if self.session is not None:
            where.append(f"session {self.session}")
        if self.step is not None:
            where.append(f"step {self.step}")
        loc = " @ ".join(where)
        return f"[{self.kind}] {loc}: {self.message}" if loc else f"[{self.kind}] {self.message}"


def validate_schedule(
    schedule: Schedule,
    scenario: DemandScenario,
    station: StationConfig,
    grid: TimeGrid | None = None,
    options: OperationOptions | None = None,
    atol: float = 1e-5,
    check_queue: bool = True,
) -> list[Violation]:
    """Procedurally re-check every operating rule against raw data.

    Independent of the MILP: recursions, capacities and the queue law are
    recomputed from the schedule matrices alone.  Returns an empty list
    exactly when the schedule is feasible (within ``atol``).
    """
    grid = grid or TimeGrid.uniform()
    options = options or OperationOptions()
    out: list[Violation] = []
    sessions = scenario.sessions
    I, T = len(sessions), grid.step_count
    eta = station.efficiency
    dt = np.asarray(grid.step_hours)

    if schedule.plug.shape != (I, T) or schedule.power_kw.shape != (I, T):
        return [Violation("shape", message=f"matrices are not {I}x{T}")]
    if schedule.charge_kwh.shape != (I, T + 1):
        return [Violation("shape", message=f"charge matrix is not {I}x{T + 1}")]

    for i, s in enumerate(sessions):
        a = schedule.assignment[i]
        if a not in ("fix", "robo", "leave"):
            out.append(Violation("assignment", i, message=f"unknown assignment {a!r}"))
            continue
        if s.preassigned_fix and a != "fix":
            out.append(Violation("preassignment", i, message="fixed-charger preassignment dropped"))
        if s.preassigned_robo and a != "robo":
            out.append(Violation("preassignment", i, message="robotic-charger preassignment dropped"))
        if a == "robo" and station.rc_count == 0:
            out.append(Violation("assignment", i, message="robotic assignment with no robotic chargers"))

        pres = np.zeros(T, dtype=bool)
        pres[s.arrival : s.departure] = True
        row = schedule.plug[i].astype(bool)
        if np.any(row & ~pres):
            out.append(Violation("plug", i, message="plugged outside the stay"))
        if a == "fix" and not np.array_equal(row, pres):
            out.append(Violation("plug", i, message="fixed charger must stay plugged for the whole stay"))
        if a == "leave" and row.any():
            out.append(Violation("plug", i, message="leaving driver cannot be plugged"))

        p = schedule.power_kw[i]
        c = schedule.curtail_kw[i]
        if np.any(p < -atol) or np.any(c < -atol):
            out.append(Violation("power", i, message="negative power"))
        if np.any(p > s.max_power_kw * row + atol):
            out.append(Violation("power", i, message="power beyond plug status or rating"))
        if np.any(p + c > s.max_power_kw * pres + atol):
            out.append(Violation("power", i, message="combined power beyond rating or stay"))

        e = schedule.charge_kwh[i]
        v = schedule.virtual_charge_kwh[i]
        if abs(e[0] - s.init_kwh) > atol or abs(v[0] - s.init_kwh) > atol:
            out.append(Violation("energy", i, message="initial charge mismatch"))
        de = e[1:] - e[:-1] - eta * dt * p
        if np.max(np.abs(de)) > atol:
            out.append(Violation("energy", i, step=int(np.argmax(np.abs(de))), message="charge recursion broken"))
        dv = v[1:] - v[:-1] - eta * dt * (p + c)
        if np.max(np.abs(dv)) > atol:
            out.append(Violation("energy", i, step=int(np.argmax(np.abs(dv))), message="completion recursion broken"))
        want = s.init_kwh if a == "leave" else s.target_kwh
        if abs(v[s.departure] - want) > max(atol, 1e-4):
            out.append(
                Violation(
                    "energy",
                    i,
                    step=s.departure,
                    message=f"completion state {v[s.departure]:.4f} != {want:.4f} at departure",
                )
            )

    for t in range(T):
        nfix = sum(
            1
            for i, s in enumerate(sessions)
            if schedule.assignment[i] == "fix" and schedule.plug[i, t]
        )
        if nfix > station.fc_count:
            out.append(Violation("capacity", step=t, message=f"{nfix} fixed-charger seats of {station.fc_count}"))
        nrobo = sum(
            1
            for i, s in enumerate(sessions)
            if schedule.assignment[i] == "robo" and schedule.plug[i, t]
        )
        if nrobo > station.rc_count:
            out.append(Violation("capacity", step=t, message=f"{nrobo} robotic chargers of {station.rc_count}"))

    if check_queue:
        tolerances = [(options.resolve_tolerance(s)) for s in sessions]
        fc_q, rc_q, fc_v, rc_v, must_leave = replay_queue(
            sessions,
            schedule.assignment,
            schedule.charge_kwh,
            station.fc_count,
            station.rc_count,
            tolerances,
            eps=options.shortfall_eps_kwh,
        )
        for i in range(I):
            if (
                fc_q[i] != schedule.fc_queue[i]
                or rc_q[i] != schedule.rc_queue[i]
                or fc_v[i] != schedule.fc_vacancy[i]
                or rc_v[i] != schedule.rc_vacancy[i]
            ):
                out.append(
                    Violation(
                        "queue",
                        i,
                        message=(
                            f"recorded queues ({schedule.fc_queue[i]},{schedule.rc_queue[i]}"
                            f"/{schedule.fc_vacancy[i]},{schedule.rc_vacancy[i]}) != replay "
                            f"({fc_q[i]},{rc_q[i]}/{fc_v[i]},{rc_v[i]})"
                        ),
                    )
                )
            left = schedule.assignment[i] == "leave"
            if left != bool(must_leave[i]):
                out.append(
                    Violation(
                        "queue",
                        i,
                        message=(
                            "left despite vacancies"
                            if left
                            else "stayed with no tolerable vacancy"
                        ),
                    )
                )
    return out


def _cost_from_matrices(
    power: np.ndarray,
    plug: np.ndarray,
    stay: np.ndarray,
    delivered: np.ndarray,
    pen_demand: np.ndarray,
    tou: np.ndarray,
    dt: np.ndarray,
    base_load: np.ndarray,
    tariff: TariffAndCosts,
    dc_floor_kw: float,
    horizon_days: float,
) -> tuple[CostBreakdown, float]:
    energy = power * dt  # kWh per session-step at the meter side
    tou_cents = float(np.sum(energy * tou))
    fee_cents = float(np.sum(energy) * tariff.fee_cents_per_kwh)

    aggregate = base_load + power.sum(axis=0) if power.size else base_load
    peak = max(float(np.max(aggregate)) if aggregate.size else 0.0, dc_floor_kw, 0.0)
    demand_cents = tariff.demand_charge_cents_per_kw_day * horizon_days * peak

    transitions = int(np.sum(plug[:, 1:] != plug[:, :-1])) if plug.shape[1] > 1 else 0
    switch_cents = tariff.switch_cost_cents * transitions

    disapp = 0.0
    for i in range(len(delivered)):
        if not stay[i] or pen_demand[i] <= 0:
            continue
        for theta, rate in zip(tariff.unsat_thresholds, tariff.unsat_penalty_cents_per_kwh):
            disapp += rate * max(theta * pen_demand[i] - delivered[i], 0.0)

    return (
        CostBreakdown(
            tou_cents=tou_cents,
            fee_cents=fee_cents,
            demand_cents=demand_cents,
            switch_cents=switch_cents,
            disappointment_cents=disapp,
        ),
        peak,
    )


def reprice(
    schedule: Schedule,
    scenario: DemandScenario,
    station: StationConfig,
    tariff: TariffAndCosts,
    grid: TimeGrid | None = None,
    options: OperationOptions | None = None,
) -> CostBreakdown:
    """Recompute the cost of a schedule from its matrices alone.

    Shares no state with the solver: switching is counted from plug
    transitions, the billed peak from the power rows, disappointment from
    delivered energy against the original (shadow) demand.
    """
    grid = grid or TimeGrid.uniform()
    options = options or OperationOptions()
    sessions = scenario.sessions
    stay = np.array([a != "leave" for a in schedule.assignment])
    delivered = np.array(
        [
            schedule.charge_kwh[i, s.departure] - s.effective_penalty_init_kwh
            for i, s in enumerate(sessions)
        ]
    )
    pen_demand = np.array([s.effective_penalty_demand_kwh for s in sessions])
    horizon_days = (
        options.horizon_days if options.horizon_days is not None else grid.total_hours / 24.0
    )
    breakdown, _ = _cost_from_matrices(
        schedule.power_kw,
        schedule.plug,
        stay,
        delivered,
        pen_demand,
        _tou_vector(tariff, grid, options),
        np.asarray(grid.step_hours),
        station.base_load_profile(grid),
        tariff,
        options.demand_charge_floor_kw,
        horizon_days,
    )
    return breakdown


# -- exhaustive search oracle ----------------------------------------------


def brute_force_operation(
    scenario: DemandScenario,
    station: StationConfig,
    tariff: TariffAndCosts,
    grid: TimeGrid | None = None,
    options: OperationOptions | None = None,
    power_levels: tuple[float, ...] | None = None,
) -> tuple[float, Schedule | None]:
    """Exhaustively search schedules on a finite power grid.

    Enumerates, in arrival order, every charger-type choice, plug pattern
    and per-step power level; the leave-or-wait law is applied
    procedurally, so infeasible combinations never appear.  Returns the
    best cost found and the corresponding schedule (None when every
    combination is infeasible, which cannot happen for clipped data).

    Independent of the MILP path: no Model is ever built here.
    """
    grid = grid or TimeGrid.uniform()
    options = options or OperationOptions()
    sessions = scenario.sessions
    I, T = len(sessions), grid.step_count
    eta = station.efficiency
    dt = np.asarray(grid.step_hours)
    tou = _tou_vector(tariff, grid, options)
    base = station.base_load_profile(grid)
    tolerances = [options.resolve_tolerance(s) for s in sessions]
    horizon_days = (
        options.horizon_days if options.horizon_days is not None else grid.total_hours / 24.0
    )

    # per-session candidate rows: (plug tuple, power tuple) over the stay
    def candidates(s: Session, kind: str):
        levels = power_levels or (0.0, s.max_power_kw)
        window = range(s.arrival, s.departure)
        if kind == "fix":
            plug_patterns = [tuple(1 for _ in window)]
        else:
            plug_patterns = list(itertools.product((0, 1), repeat=len(window)))
        for pat in plug_patterns:
            slots = [k for k, on in enumerate(pat) if on]
            # zero power on a plugged step is admissible (idle occupancy)
            for combo in itertools.product(levels, repeat=len(slots)):
                row = [0.0] * len(window)
                for k, v in zip(slots, combo):
                    row[k] = v
                delivered = sum(
                    v * eta * dt[s.arrival + k] for k, v in enumerate(row)
                )
                if delivered > s.demand_kwh + 1e-9:
                    continue  # would push the charge past the target
                yield pat, tuple(row)

    best_cost = math.inf
    best: tuple | None = None
    fix_used = np.zeros(T, dtype=int)
    rc_used = np.zeros(T, dtype=int)
    chosen: list[tuple[str, tuple, tuple]] = []

    def recurse(i: int) -> None:
        nonlocal best_cost, best
        if i == I:
            cost = leaf_cost()
            if cost < best_cost - 1e-12:
                best_cost = cost
                best = list(chosen)
            return
        s = sessions[i]
        # queue state from earlier (final) choices
        cap = queue_capacity(tolerances[i], station.rc_count, I)
        probe = max(s.arrival - 1, 0)
        nf = nr = 0
        for j in range(i):
            if not presence_indicator(sessions[j], s.arrival):
                continue
            kind_j, _, row_j = chosen[j]
            if kind_j == "fix":
                nf += 1
            elif kind_j == "robo":
                got = sum(
                    v * eta * dt[sessions[j].arrival + k]
                    for k, v in enumerate(row_j)
                    if sessions[j].arrival + k < probe
                )
                if sessions[j].demand_kwh - got >= 0.5 * options.shortfall_eps_kwh:
                    nr += 1
        vfix = station.fc_count - nf
        vrobo = max(cap - nr, 0)
        must_leave = vfix + vrobo <= 0

        if must_leave:
            if s.preassigned_fix or s.preassigned_robo:
                return  # contradicts the preassignment: dead branch
            window = range(s.arrival, s.departure)
            chosen.append(("leave", tuple(0 for _ in window), tuple(0.0 for _ in window)))
            recurse(i + 1)
            chosen.pop()
            return

        kinds = []
        if not s.preassigned_robo:
            kinds.append("fix")
        if not s.preassigned_fix and station.rc_count >= 1:
            kinds.append("robo")
        for kind in kinds:
            for pat, row in candidates(s, kind):
                used = fix_used if kind == "fix" else rc_used
                limit = station.fc_count if kind == "fix" else station.rc_count
                ok = True
                for k, on in enumerate(pat):
                    if on and used[s.arrival + k] + 1 > limit:
                        ok = False
                        break
                if not ok:
                    continue
                for k, on in enumerate(pat):
                    if on:
                        used[s.arrival + k] += 1
                chosen.append((kind, pat, row))
                recurse(i + 1)
                chosen.pop()
                for k, on in enumerate(pat):
                    if on:
                        used[s.arrival + k] -= 1

    def leaf_cost() -> float:
        power = np.zeros((I, T))
        plug = np.zeros((I, T), dtype=np.int8)
        stay = np.zeros(I, dtype=bool)
        delivered = np.zeros(I)
        pen = np.zeros(I)
        for i, s in enumerate(sessions):
            kind, pat, row = chosen[i]
            stay[i] = kind != "leave"
            pen[i] = s.effective_penalty_demand_kwh
            for k, on in enumerate(pat):
                plug[i, s.arrival + k] = on
            for k, v in enumerate(row):
                power[i, s.arrival + k] = v
            got = float(np.sum(power[i] * eta * dt))
            delivered[i] = got + (s.init_kwh - s.effective_penalty_init_kwh)
        breakdown, _ = _cost_from_matrices(
            power,
            plug,
            stay,
            delivered,
            pen,
            tou,
            dt,
            base,
            tariff,
            options.demand_charge_floor_kw,
            horizon_days,
        )
        return breakdown.opex_cents

    recurse(0)

    if best is None:
        return math.inf, None

    # materialize the winning schedule
    power = np.zeros((I, T))
    curtail = np.zeros((I, T))
    plug = np.zeros((I, T), dtype=np.int8)
    charge = np.zeros((I, T + 1))
    virtual = np.zeros((I, T + 1))
    assignment = []
    for i, s in enumerate(sessions):
        kind, pat, row = best[i]
        assignment.append(kind)
        for k, on in enumerate(pat):
            plug[i, s.arrival + k] = on
        for k, v in enumerate(row):
            power[i, s.arrival + k] = v
        charge[i, 0] = s.init_kwh
        for t in range(T):
            charge[i, t + 1] = charge[i, t] + eta * dt[t] * power[i, t]
        # completion channel: route the undelivered remainder through the
        # earliest steps with spare rating, so the trajectory reaches the
        # target exactly
        if kind != "leave":
            missing = s.target_kwh - charge[i, s.departure]
            for t in range(s.arrival, s.departure):
                if missing <= 1e-12:
                    break
                room = s.max_power_kw - power[i, t]
                add = min(room * eta * dt[t], missing)
                curtail[i, t] = add / (eta * dt[t])
                missing -= add
        virtual[i, 0] = s.init_kwh
        for t in range(T):
            virtual[i, t + 1] = virtual[i, t] + eta * dt[t] * (power[i, t] + curtail[i, t])
    fc_q, rc_q, fc_v, rc_v, _ = replay_queue(
        sessions,
        assignment,
        charge,
        station.fc_count,
        station.rc_count,
        tolerances,
        eps=options.shortfall_eps_kwh,
    )
    stay = np.array([a != "leave" for a in assignment])
    delivered = np.array(
        [charge[i, s.departure] - s.effective_penalty_init_kwh for i, s in enumerate(sessions)]
    )
    pen = np.array([s.effective_penalty_demand_kwh for s in sessions])
    breakdown, peak = _cost_from_matrices(
        power, plug, stay, delivered, pen, tou, dt, base, tariff,
        options.demand_charge_floor_kw, horizon_days,
    )
    disapp = np.zeros(I)
    for i in range(I):
        if stay[i] and pen[i] > 0:
            disapp[i] = sum(
                r * max(th * pen[i] - delivered[i], 0.0)
                for th, r in zip(tariff.unsat_thresholds, tariff.unsat_penalty_cents_per_kwh)
            )
    schedule = Schedule(
        assignment=tuple(assignment),
        plug=plug,
        power_kw=power,
        curtail_kw=curtail,
        charge_kwh=charge,
        virtual_charge_kwh=virtual,
        fc_queue=fc_q,
        rc_queue=rc_q,
        fc_vacancy=fc_v,
        rc_vacancy=rc_v,
        peak_power_kw=peak,
        disappointment_cents=disapp,
        objective_cents=best_cost,
        solver_status="enumerated",
    )
    return best_cost, schedule
