"""Charger-fleet sizing.

The sizing model replicates one operation block per demand scenario and
couples the replicas through two shared integers: how many fixed and how
many robotic chargers to install.  The objective trades the
probability-weighted daily operating cost against straight-line daily
capital amortization; an optional constraint keeps the weighted share of
satisfied customers above a floor.

The queue-capacity law makes sizing nonlinear on its face: a driver
tolerating w queue slots per robot waits behind floor((1+w)n) - 1
vehicles, a stepwise function of the robot count n.  With n expanded
into selector binaries (exactly one of rc_is[0..N] holds), every such
step function becomes a plain weighted sum of the selectors, and the
whole model stays linear.

``grid_search`` solves each charger combination independently and is
deliberately kept free of the sizing model's machinery: the two
approaches must land on the same answer, and do so in the tests.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .analytics import csi, poi, satisfied_rate
from .domain import (
    DemandScenario,
    Schedule,
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
from .operation import (
    OperationModelBuilder,
    OperationOptions,
    queue_capacity,
    replay_queue,
    reprice,
    solve_operation,
)

__all__ = [
    "PlanningProblem",
    "PlanResult",
    "GridCell",
    "SweepPoint",
    "build_planning_model",
    "add_sr_constraint",
    "solve_planning",
    "grid_search",
    "sensitivity_sweep",
]


@dataclass(frozen=True)
class PlanningProblem:
    """A sizing question: scenarios, charger-count limits, prices.

    ``scenarios`` carry their own probabilities, which must sum to one.
    ``require_sr`` turns on the satisfied-rate floor from the tariff
    (``sr_requirement`` at threshold ``sr_threshold``).  The demand
    charge is probability-weighted across scenarios by default;
    ``demand_charge_mode="max"`` bills the worst scenario instead.
    """

    scenarios: tuple[DemandScenario, ...]
    fc_limit: int
    rc_limit: int
    tariff: TariffAndCosts = TariffAndCosts()
    grid: TimeGrid | None = None
    require_sr: bool = False
    demand_charge_mode: str = "weighted"
    efficiency: float = 1.0
    base_load_kw: float = 0.0
    options: OperationOptions = OperationOptions()

    def __post_init__(self) -> None:
        if not self.scenarios:
            raise DataError("sizing needs at least one demand scenario")
        if self.fc_limit < 0 or self.rc_limit < 0:
            raise DataError("charger-count limits cannot be negative")
        total = sum(s.probability for s in self.scenarios)
        if abs(total - 1.0) > 1e-6:
            raise DataError(f"scenario probabilities sum to {total}, not 1")
        if self.demand_charge_mode not in ("weighted", "max"):
            raise ConfigError(
                f"unknown demand charge mode {self.demand_charge_mode!r}"
            )
        if self.options.queue == "off":
            raise ConfigError(
                "sizing always builds the leave law: a zero-robot fleet must "
                "be able to turn drivers away"
            )

    @property
    def probabilities(self) -> tuple[float, ...]:
        return tuple(s.probability for s in self.scenarios)

    def station(self, fc: int, rc: int) -> StationConfig:
        return StationConfig(
            fc_count=fc,
            rc_count=rc,
            base_load_kw=self.base_load_kw,
            efficiency=self.efficiency,
        )

    def clipped(self) -> "PlanningProblem":
        g = self.grid or TimeGrid.uniform()
        return replace(
            self,
            grid=g,
            scenarios=tuple(s.clipped(g, self.efficiency) for s in self.scenarios),
        )


@dataclass(frozen=True)
class PlanResult:
    """Chosen charger counts with per-scenario accounting.

    ``opex_cents[s]`` is scenario s's repriced daily operating cost and
    ``satisfied[s]`` its recomputed satisfied share; both come from the
    extracted schedules, not from solver variables, so ``tco_cents`` is
    weighted opex plus capex by construction.  ``objective_cents`` keeps
    the model's own optimum for cross-checks.
    """

    fc_count: int
    rc_count: int
    tco_cents: float
    capex_cents: float
    opex_cents: tuple[float, ...]
    satisfied: tuple[float, ...]
    probabilities: tuple[float, ...]
    schedules: tuple[Schedule, ...]
    objective_cents: float
    mip_gap: float
    wall_time_s: float
    solver_status: str

    @property
    def weighted_opex_cents(self) -> float:
        return float(sum(p * c for p, c in zip(self.probabilities, self.opex_cents)))

    @property
    def weighted_satisfied(self) -> float:
        return float(sum(p * r for p, r in zip(self.probabilities, self.satisfied)))

    @property
    def tco_usd(self) -> float:
        return self.tco_cents / 100.0


class _SizedModel:
    """Handles of one assembled sizing model."""

    def __init__(self, problem: PlanningProblem):
        self.problem = problem
        self.model = Model(name="sizing")
        self.fc_var: Variable | None = None
        self.rc_var: Variable | None = None
        self.rc_selectors: list[Variable] = []
        self.builders: list[OperationModelBuilder] = []
        self.parts: list[dict[str, LinExpr]] = []
        self.sat: list[list[Variable]] = []


def _add_sizing_rows(sized: _SizedModel, b: OperationModelBuilder) -> None:
    """Seat capacities against the shared charger-count variables."""
    model, m, n = sized.model, sized.fc_var, sized.rc_var
    for t in range(b.grid.step_count):
        here = [i for i, s in enumerate(b.sessions) if presence_indicator(s, t)]
        if not here:
            continue
        model.add(
            lin_sum(b.assign_fix[i] for i in here),
            "<=",
            LinExpr.of(m),
            name=f"fc_size[{t}]",
        )
        model.add(
            lin_sum(LinExpr.of(b.plug[i][t]) - b.assign_fix[i] for i in here),
            "<=",
            LinExpr.of(n),
            name=f"rc_size[{t}]",
        )
    for i, s in enumerate(b.sessions):
        # a robotic assignment needs at least one robot on the lot
        model.add(b.assign_robo[i], "<=", LinExpr.of(n), name=f"robo_needs_rc[{s.id}]")


def _add_sized_queue_block(sized: _SizedModel, b: OperationModelBuilder) -> None:
    """The leave-or-wait law with the robot count still undecided.

    Mirrors the operation builder's queue block, except every place the
    queue cap floor((1+w)N) appeared as a constant now carries the
    selector-expanded table value, and the fixed-seat vacancy reads the
    shared charger variable.
    """
    model, m = sized.model, sized.fc_var
    problem = sized.problem
    I = len(b.sessions)
    eps = b.options.shortfall_eps_kwh
    M_max, N_max = problem.fc_limit, problem.rc_limit
    sel = sized.rc_selectors
    rc_present = lin_sum(sel[1:])  # 1 exactly when n >= 1

    for i, s in enumerate(b.sessions):
        tol = b.tolerances[i]
        table = [queue_capacity(tol, k, I) for k in range(N_max + 1)]
        cap_max = table[-1]
        b.queue_caps.append(cap_max)
        ahead = [j for j in range(i) if presence_indicator(b.sessions[j], s.arrival)]
        qfix = lin_sum(b.assign_fix[j] for j in ahead)
        b.fc_queue.append(qfix)
        vfix = LinExpr.of(m) - qfix
        b.fc_vacancy.append(vfix)

        if N_max >= 1 and math.isinf(tol):
            # an always-stay driver's cap is 0 without robots and the whole
            # session count with any, which the at most I-1 arrivals ahead
            # can never fill; the vacancy collapses to "is there a robot at
            # all", scaled so the leave rule still reads it exactly
            qrobo = LinExpr()
            vrobo = float(I) * rc_present
        elif N_max >= 1:
            rc_members = []
            probe = s.arrival - 1
            for j in ahead:
                other = b.sessions[j]
                shortfall = LinExpr.of(other.target_kwh) - b.charge_expr(j, probe)
                if not shortfall.terms:
                    # constant shortfall (probe before the other's stay
                    # started): the indicator is data, not a variable;
                    # same half-band threshold as the procedural replay
                    if shortfall.constant >= 0.5 * eps:
                        rc_members.append(LinExpr.of(b.assign_robo[j]))
                    continue
                if other.demand_kwh <= eps:
                    continue  # can never fall noticeably short
                z = linearize_shortfall_indicator(
                    model,
                    shortfall,
                    bound=other.demand_kwh,
                    eps=eps,
                    name=f"unfinished[{other.id}@{s.id}]",
                )
                w = linearize_and(
                    model, b.assign_robo[j], z, name=f"queued[{other.id}@{s.id}]"
                )
                rc_members.append(LinExpr.of(w))
            qrobo = lin_sum(rc_members)
            cap_expr = lin_sum(
                table[k] * LinExpr.of(sel[k]) for k in range(N_max + 1)
            )
            if not rc_members:
                vrobo = cap_expr
            else:
                # tolerance >= 0 makes the cap at the limit at least the
                # limit itself, so the pos-part bound is never degenerate
                vrobo_var = linearize_pos_part(
                    model,
                    cap_expr - qrobo,
                    bound=float(cap_max + len(rc_members)),
                    name=f"rc_vac[{s.id}]",
                )
                vrobo = LinExpr.of(vrobo_var)
        else:
            # no robots allowed at all: the robo vacancy is identically 0
            qrobo = LinExpr()
            vrobo = LinExpr()
        b.rc_queue.append(qrobo)
        b.rc_vacancy.append(vrobo)

        vmax = M_max + cap_max
        if vmax < 1:
            # no seat can ever exist at the limits: the driver must leave
            model.fix(b.leave[i], 1)
            continue
        linearize_leave_rule(
            model, vfix + vrobo, vmax=float(vmax), name=f"leave_rule[{s.id}]", var=b.leave[i]
        )
        if M_max >= 1:
            model.add(
                vfix,
                "<=",
                M_max * (1.0 - LinExpr.of(b.leave[i])),
                name=f"leave_gate_fix[{s.id}]",
            )
        if cap_max >= 1:
            model.add(
                vrobo,
                "<=",
                cap_max * (1.0 - LinExpr.of(b.leave[i])),
                name=f"leave_gate_robo[{s.id}]",
            )


def add_sr_constraint(
    model: Model,
    builders: list[OperationModelBuilder],
    theta_sr: float,
    rho: float,
) -> list[list[Variable]]:
    """Weighted satisfied-rate floor across scenario replicas.

    Per session, a binary can claim satisfaction only when the delivered
    energy reaches theta_sr of the ask; one direction suffices because
    the floor only ever pushes the binaries up.  Zero-demand sessions
    are satisfied by definition.  Scenario weights come from the
    builders' own scenarios.  Returns the satisfaction binaries per
    scenario.
    """
    if rho > 1.0:
        raise DataError(f"cannot require a satisfied share of {rho} > 1")
    handles: list[list[Variable]] = []
    floor_terms: list[LinExpr] = []
    for b in builders:
        p = b.scenario.probability
        sats: list[Variable] = []
        for i, s in enumerate(b.sessions):
            sat = model.add_binary(name=f"sat[{s.id}]")
            if s.demand_kwh <= 0:
                model.fix(sat, 1)
            else:
                delivered = LinExpr.of(b.charge_expr(i, s.departure)) - s.init_kwh
                model.add(
                    delivered,
                    ">=",
                    theta_sr * s.demand_kwh
                    - s.demand_kwh * (1.0 - LinExpr.of(sat)),
                    name=f"sr_def[{s.id}]",
                )
            sats.append(sat)
        handles.append(sats)
        if sats:
            floor_terms.append((p / len(sats)) * lin_sum(sats))
        else:
            # a day with no customers satisfies everyone it has
            floor_terms.append(p * LinExpr.of(1.0))
    model.add(lin_sum(floor_terms), ">=", rho, name="sr_floor")
    return handles


def _assemble(problem: PlanningProblem) -> _SizedModel:
    """Assemble the sizing MILP: scenario replicas around shared counts."""
    problem = problem.clipped()
    sized = _SizedModel(problem)
    model = sized.model
    sized.fc_var = model.add_integer(0, problem.fc_limit, name="fc_count")
    sized.rc_var = model.add_integer(0, problem.rc_limit, name="rc_count")
    sized.rc_selectors = [
        model.add_binary(name=f"rc_is[{k}]") for k in range(problem.rc_limit + 1)
    ]
    model.add(lin_sum(sized.rc_selectors), "==", 1, name="rc_onehot")
    model.add(
        LinExpr.of(sized.rc_var)
        - lin_sum(k * LinExpr.of(d) for k, d in enumerate(sized.rc_selectors)),
        "==",
        0.0,
        name="rc_link",
    )

    station = problem.station(problem.fc_limit, problem.rc_limit)
    for scn in problem.scenarios:
        b = OperationModelBuilder(
            scn, station, problem.tariff, problem.grid, problem.options, model=model
        )
        # the leave law must stay live even if every driver is patient:
        # the model may well decide to install no robots
        b.queue_enabled = True
        b.add_assignment_block()
        b.add_energy_block()
        _add_sizing_rows(sized, b)
        _add_sized_queue_block(sized, b)
        sized.builders.append(b)
        sized.parts.append(b.cost_parts())

    tariff = problem.tariff
    probs = problem.probabilities
    opex_terms: list[LinExpr] = []
    for p, parts in zip(probs, sized.parts):
        pieces = parts["margin"] + parts["switch"] + parts["unsat"]
        if problem.demand_charge_mode == "weighted":
            pieces = pieces + parts["demand"]
        opex_terms.append(p * pieces)
    objective = lin_sum(opex_terms)

    if problem.demand_charge_mode == "max":
        grid = problem.grid
        horizon_days = (
            problem.options.horizon_days
            if problem.options.horizon_days is not None
            else grid.total_hours / 24.0
        )
        dc_coeff = tariff.demand_charge_cents_per_kw_day * horizon_days
        worst = model.add_continuous(
            lb=max(problem.options.demand_charge_floor_kw, 0.0), name="worst_peak"
        )
        for b in sized.builders:
            model.add(LinExpr.of(worst), ">=", b.peak, name="worst_peak_bound")
        objective = objective + dc_coeff * LinExpr.of(worst)

    if problem.require_sr:
        sized.sat = add_sr_constraint(
            model,
            sized.builders,
            tariff.sr_threshold,
            tariff.sr_requirement,
        )

    objective = (
        objective
        + tariff.capex_daily_cents(1, 0) * LinExpr.of(sized.fc_var)
        + tariff.capex_daily_cents(0, 1) * LinExpr.of(sized.rc_var)
    )
    model.set_objective(objective)
    return sized


def build_planning_model(problem: PlanningProblem) -> Model:
    """The sizing MILP as a bare model, for inspection or serialization."""
    return _assemble(problem).model


def solve_planning(
    problem: PlanningProblem,
    mip_gap: float = 0.01,
    time_limit: float | None = None,
    solver_options: dict | None = None,
) -> PlanResult:
    """Size the station: returns counts, accounting and the schedules behind them."""
    sized = _assemble(problem)
    problem = sized.problem  # the clipped copy
    res = solve(sized.model, mip_gap=mip_gap, time_limit=time_limit, solver_options=solver_options)
    if res.status == "infeasible":
        raise SolverError(
            "no feasible plan: the satisfied-rate floor cannot be met even "
            f"with every charger installed ({problem.fc_limit} fixed, "
            f"{problem.rc_limit} robotic)"
        )
    if not res.ok:
        raise SolverError(f"sizing solve failed: {res.status} ({res.message})")

    fc = int(round(res.value(sized.fc_var)))
    rc = int(round(res.value(sized.rc_var)))
    station = problem.station(fc, rc)

    schedules: list[Schedule] = []
    opex: list[float] = []
    demand_cents: list[float] = []
    rates: list[float] = []
    for b, scn in zip(sized.builders, problem.scenarios):
        sched = b.extract(res)
        # the builder replayed queue diagnostics against the limits; redo
        # them against the chosen counts
        fc_q, rc_q, fc_v, rc_v, _ = replay_queue(
            scn.sessions,
            sched.assignment,
            sched.charge_kwh,
            fc,
            rc,
            b.tolerances,
            eps=b.options.shortfall_eps_kwh,
        )
        sched.fc_queue, sched.rc_queue = fc_q, rc_q
        sched.fc_vacancy, sched.rc_vacancy = fc_v, rc_v
        breakdown = reprice(sched, scn, station, problem.tariff, problem.grid, problem.options)
        # under worst-scenario billing the per-replica peak variable is
        # unpriced and can float; rebuild the billed peak from the loads
        load = sched.power_kw.sum(axis=0) + station.base_load_profile(problem.grid)
        floor = max(problem.options.demand_charge_floor_kw, 0.0)
        sched.peak_power_kw = max(float(load.max()), floor)
        sched.objective_cents = breakdown.opex_cents
        schedules.append(sched)
        opex.append(breakdown.opex_cents)
        demand_cents.append(breakdown.demand_cents)
        if scn.sessions:
            rates.append(satisfied_rate(sched, scn, problem.tariff.sr_threshold))
        else:
            rates.append(1.0)

    probs = problem.probabilities
    capex_cents = problem.tariff.capex_daily_cents(fc, rc)
    tco = sum(p * o for p, o in zip(probs, opex)) + capex_cents
    if problem.demand_charge_mode == "max":
        # the expectation of the demand charge is replaced by the worst
        # scenario's, billed once
        tco += max(demand_cents) - sum(p * d for p, d in zip(probs, demand_cents))
    return PlanResult(
        fc_count=fc,
        rc_count=rc,
        tco_cents=float(tco),
        capex_cents=capex_cents,
        opex_cents=tuple(opex),
        satisfied=tuple(rates),
        probabilities=probs,
        schedules=tuple(schedules),
        objective_cents=res.objective,
        mip_gap=res.mip_gap,
        wall_time_s=res.wall_time_s,
        solver_status=res.status,
    )


# -- exhaustive search -----------------------------------------------------


@dataclass(frozen=True)
class GridCell:
    """One charger combination, operated optimally scenario by scenario."""

    fc_count: int
    rc_count: int
    tco_cents: float
    opex_cents: float
    satisfied: float
    capex_cents: float
    solver_status: str
    message: str = ""


def _solve_cell(
    problem: PlanningProblem,
    fc: int,
    rc: int,
    mip_gap: float,
    time_limit: float | None,
) -> GridCell:
    station = problem.station(fc, rc)
    capex_cents = problem.tariff.capex_daily_cents(fc, rc)
    opex = 0.0
    sat = 0.0
    status = "optimal"
    try:
        for scn in problem.scenarios:
            sched, cost = solve_operation(
                scn,
                station,
                problem.tariff,
                problem.grid,
                options=problem.options,
                mip_gap=mip_gap,
                time_limit=time_limit,
            )
            opex += scn.probability * cost.opex_cents
            if scn.sessions:
                sat += scn.probability * satisfied_rate(
                    sched, scn, problem.tariff.sr_threshold
                )
            else:
                sat += scn.probability
            if sched.solver_status != "optimal":
                status = sched.solver_status
    except SolverError as exc:
        return GridCell(
            fc_count=fc,
            rc_count=rc,
            tco_cents=math.inf,
            opex_cents=math.inf,
            satisfied=0.0,
            capex_cents=capex_cents,
            solver_status="error",
            message=str(exc),
        )
    return GridCell(
        fc_count=fc,
        rc_count=rc,
        tco_cents=opex + capex_cents,
        opex_cents=opex,
        satisfied=sat,
        capex_cents=capex_cents,
        solver_status=status,
    )


def grid_search(
    problem: PlanningProblem,
    fc_range=None,
    rc_range=None,
    mip_gap: float = 0.01,
    time_limit: float | None = None,
    workers: int = 1,
) -> tuple[GridCell, ...]:
    """Operate every charger combination and tabulate its cost.

    Each cell solves the scenarios independently at fixed counts, with
    no sizing machinery involved; a cell whose solve fails is recorded
    with an infinite cost rather than aborting the sweep.
    """
    problem = problem.clipped()
    fcs = list(fc_range if fc_range is not None else range(problem.fc_limit + 1))
    rcs = list(rc_range if rc_range is not None else range(problem.rc_limit + 1))
    pairs = [(fc, rc) for fc in fcs for rc in rcs]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cells = list(
                pool.map(
                    lambda p: _solve_cell(problem, p[0], p[1], mip_gap, time_limit),
                    pairs,
                )
            )
    else:
        cells = [_solve_cell(problem, fc, rc, mip_gap, time_limit) for fc, rc in pairs]
    return tuple(sorted(cells, key=lambda c: (c.fc_count, c.rc_count)))


# -- sensitivity sweeps ----------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    """Optimal plan at one setting of a demand or price descriptor."""

    index: str
    value: float
    achieved: float
    fc_count: int
    rc_count: int
    tco_cents: float
    fc_only_tco_cents: float
    rc_only_tco_cents: float


def _resample_sessions(
    scn: DemandScenario, factor: float, rng: np.random.Generator
) -> DemandScenario:
    size = int(round(factor * len(scn.sessions)))
    if size == 0 or not scn.sessions:
        return replace(scn, sessions=())
    picks = rng.integers(0, len(scn.sessions), size=size)
    return DemandScenario.ordered(
        (scn.sessions[k] for k in picks),
        probability=scn.probability,
        label=scn.label,
    )


def _with_slackness(problem: PlanningProblem, target: float) -> PlanningProblem:
    """Scale every demand by one factor so the mean slack share hits target."""
    current = _weighted_index(problem, lambda scn, pr: csi(scn, pr.grid, pr.efficiency))
    if current >= 1.0 - 1e-12:
        raise DataError("scenarios carry no demand; slackness cannot be set")
    factor = max(0.0, (1.0 - target) / (1.0 - current))
    scenarios = []
    for scn in problem.scenarios:
        sessions = []
        for s in scn.sessions:
            hours = (problem.grid or TimeGrid.uniform()).hours_between(
                s.arrival, s.departure
            )
            cap = hours * s.max_power_kw * problem.efficiency
            # the rescaled ask is the real ask of this synthetic day, so
            # the penalty shadows of the clipped original do not apply
            sessions.append(
                replace(
                    s,
                    demand_kwh=min(factor * s.demand_kwh, cap),
                    penalty_init_kwh=None,
                    penalty_demand_kwh=None,
                )
            )
        scenarios.append(replace(scn, sessions=tuple(sessions)))
    return replace(problem, scenarios=tuple(scenarios))


def _with_tou_shift(problem: PlanningProblem, hours: float) -> PlanningProblem:
    base = np.asarray(problem.tariff.tou_cents_per_kwh, dtype=float)
    shift = int(round(hours * len(base) / 24.0))
    rolled = tuple(np.roll(base, shift))
    return replace(problem, tariff=replace(problem.tariff, tou_cents_per_kwh=rolled))


def _weighted_index(problem: PlanningProblem, fn) -> float:
    """Probability-weighted index over the scenarios where it is defined."""
    acc = mass = 0.0
    for scn in problem.scenarios:
        if scn.sessions and sum(s.demand_kwh for s in scn.sessions) > 0:
            acc += scn.probability * fn(scn, problem)
            mass += scn.probability
    if mass <= 0:
        raise DataError("no scenario carries demand; the index is undefined")
    return acc / mass


def sensitivity_sweep(
    problem: PlanningProblem,
    index: str,
    values,
    rng: np.random.Generator | None = None,
    mip_gap: float = 0.01,
    time_limit: float | None = None,
) -> tuple[SweepPoint, ...]:
    """Re-size the station across a range of one descriptor.

    ``index`` picks the knob: "rci" scales the robot capital cost,
    "csi" rescales demands toward a target slack share, "poi" shifts
    the tariff clock, "dgi" resamples session counts (needs ``rng``).
    Each point also sizes the two pure fleets for reference.
    """
    if index not in ("rci", "csi", "poi", "dgi"):
        raise ConfigError(f"unknown sensitivity index {index!r}")
    if index == "dgi" and rng is None:
        raise DataError("the demand-growth sweep resamples sessions and needs rng")
    problem = problem.clipped()
    points: list[SweepPoint] = []
    for v in values:
        v = float(v)
        if index == "rci":
            p2 = replace(
                problem,
                tariff=replace(
                    problem.tariff,
                    capital_rc_usd=v * problem.tariff.capital_fc_usd,
                ),
            )
            achieved = v
        elif index == "csi":
            p2 = _with_slackness(problem, v)
            achieved = _weighted_index(
                p2, lambda scn, pr: csi(scn, pr.grid, pr.efficiency)
            )
        elif index == "poi":
            p2 = _with_tou_shift(problem, v)
            achieved = _weighted_index(
                p2, lambda scn, pr: poi(scn, pr.tariff, pr.grid, pr.efficiency)
            )
        else:
            p2 = replace(
                problem,
                scenarios=tuple(
                    _resample_sessions(scn, v, rng) for scn in problem.scenarios
                ),
            )
            achieved = v
        full = solve_planning(p2, mip_gap=mip_gap, time_limit=time_limit)
        fc_only = solve_planning(
            replace(p2, rc_limit=0), mip_gap=mip_gap, time_limit=time_limit
        )
        rc_only = solve_planning(
            replace(p2, fc_limit=0), mip_gap=mip_gap, time_limit=time_limit
        )
        points.append(
            SweepPoint(
                index=index,
                value=v,
                achieved=achieved,
                fc_count=full.fc_count,
                rc_count=full.rc_count,
                tco_cents=full.tco_cents,
                fc_only_tco_cents=fc_only.tco_cents,
                rc_only_tco_cents=rc_only.tco_cents,
            )
        )
    return tuple(points)
