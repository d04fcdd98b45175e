"""Small mixed-integer linear modeling layer with exact logic gadgets.

The model container is deliberately minimal: variables, linear constraints,
one linear objective, always minimized.  Solving goes through scipy's HiGHS
interface; an independent exhaustive-enumeration oracle solves the same
models by brute force so the two routes can be checked against each other.

The gadget functions encode the nonlinear fragments the station models
need (products of binaries, positive parts, charge-shortfall indicators and
the leave-or-wait rule) with big-M constants that are always derived from
problem data, never from a global magic number.
"""

from __future__ import annotations

import io
import itertools
import math
import re
import time
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.optimize
import scipy.sparse

from .errors import SolverError

__all__ = [
    "CONTINUOUS",
    "BINARY",
    "INTEGER",
    "Variable",
    "LinExpr",
    "lin_sum",
    "Model",
    "SolveResult",
    "solve",
    "enumerate_oracle",
    "linearize_and",
    "linearize_pos_part",
    "linearize_shortfall_indicator",
    "linearize_leave_rule",
    "write_lp",
    "read_lp",
]

CONTINUOUS = "continuous"
BINARY = "binary"
INTEGER = "integer"

_FEAS_TOL = 1e-6


@dataclass(frozen=True)
class Variable:
    """Handle into a model; cheap to copy, hashable, compares by index."""

    index: int
    name: str
    kind: str
    lb: float
    ub: float

    def __hash__(self) -> int:
        return self.index

    def __eq__(self, other) -> bool:
        return isinstance(other, Variable) and other.index == self.index


class LinExpr:
    """Immutable-by-convention linear expression: sum of coef*var + constant."""

    __slots__ = ("terms", "constant")

    def __init__(self, terms: dict[int, float] | None = None, constant: float = 0.0):
        self.terms = terms or {}
        self.constant = constant

    @staticmethod
    def of(x) -> "LinExpr":
        if isinstance(x, LinExpr):
            return x
        if isinstance(x, Variable):
            return LinExpr({x.index: 1.0})
        return LinExpr({}, float(x))

    def __add__(self, other) -> "LinExpr":
        o = LinExpr.of(other)
        terms = dict(self.terms)
        for i, c in o.terms.items():
            terms[i] = terms.get(i, 0.0) + c
        return LinExpr(terms, self.constant + o.constant)

    __radd__ = __add__

    def __sub__(self, other) -> "LinExpr":
        return self + (LinExpr.of(other) * -1.0)

    def __rsub__(self, other) -> "LinExpr":
        return LinExpr.of(other) + (self * -1.0)

    def __mul__(self, k) -> "LinExpr":
        k = float(k)
        return LinExpr({i: c * k for i, c in self.terms.items()}, self.constant * k)

    __rmul__ = __mul__

    def __neg__(self) -> "LinExpr":
        return self * -1.0

    def value(self, assignment: np.ndarray) -> float:
        return self.constant + sum(c * assignment[i] for i, c in self.terms.items())


def lin_sum(items) -> LinExpr:
    """Sum variables/expressions/constants without quadratic dict churn."""
    terms: dict[int, float] = {}
    constant = 0.0
    for item in items:
        if isinstance(item, Variable):
            terms[item.index] = terms.get(item.index, 0.0) + 1.0
        elif isinstance(item, LinExpr):
            for i, c in item.terms.items():
                terms[i] = terms.get(i, 0.0) + c
            constant += item.constant
        else:
            constant += float(item)
    return LinExpr(terms, constant)


@dataclass
class _Constraint:
    terms: dict[int, float]
    sense: str  # '<=', '>=', '=='
    rhs: float
    name: str


class Model:
    """Container for a minimization MILP."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[_Constraint] = []
        self.objective = LinExpr()

    # -- variables ---------------------------------------------------------

    def _add_var(self, kind: str, lb: float, ub: float, name: str | None) -> Variable:
        if lb > ub:
            raise ValueError(f"variable bounds crossed: [{lb}, {ub}]")
        idx = len(self.variables)
        var = Variable(idx, name or f"v{idx}", kind, float(lb), float(ub))
        self.variables.append(var)
        return var

    def add_continuous(self, lb: float = 0.0, ub: float = math.inf, name: str | None = None) -> Variable:
        return self._add_var(CONTINUOUS, lb, ub, name)

    def add_binary(self, name: str | None = None) -> Variable:
        return self._add_var(BINARY, 0.0, 1.0, name)

    def add_integer(self, lb: float, ub: float, name: str | None = None) -> Variable:
        lo = math.ceil(lb - 1e-9) if math.isfinite(lb) else lb
        hi = math.floor(ub + 1e-9) if math.isfinite(ub) else ub
        return self._add_var(INTEGER, lo, hi, name)

    # -- constraints and objective ----------------------------------------

    def add(self, lhs, sense: str, rhs=0.0, name: str | None = None) -> None:
        """Add ``lhs sense rhs`` with any mix of expressions on both sides."""
        if sense not in ("<=", ">=", "=="):
            raise ValueError(f"unknown sense {sense!r}")
        expr = LinExpr.of(lhs) - LinExpr.of(rhs)
        terms = {i: c for i, c in expr.terms.items() if c != 0.0}
        self.constraints.append(
            _Constraint(terms, sense, -expr.constant, name or f"c{len(self.constraints)}")
        )

    def set_objective(self, expr) -> None:
        self.objective = LinExpr.of(expr)

    def fix(self, var: Variable, value: float) -> None:
        """Pin a variable by equality constraint (bounds stay as declared)."""
        self.add(var, "==", value, name=f"fix_{var.name}")

    @property
    def discrete_variables(self) -> list[Variable]:
        return [v for v in self.variables if v.kind != CONTINUOUS]


# -- linearization gadgets -------------------------------------------------


def linearize_and(model: Model, a: Variable, b: Variable, name: str = "and") -> Variable:
    """Binary w = a AND b for binary a, b (three-inequality product form)."""
    if a.kind != BINARY or b.kind != BINARY:
        raise ValueError("AND gadget needs binary inputs")
    w = model.add_binary(name=name)
    model.add(w, "<=", a, name=f"{name}_le_a")
    model.add(w, "<=", b, name=f"{name}_le_b")
    model.add(w, ">=", LinExpr.of(a) + b - 1.0, name=f"{name}_ge_sum")
    return w


def linearize_pos_part(model: Model, expr, bound: float, name: str = "pos") -> Variable:
    """Continuous v = max(expr, 0) for |expr| <= bound at any feasible point.

    An indicator binary b tracks the sign of expr; at every integer-feasible
    point v is pinned exactly (b=1 forces v = expr >= 0, b=0 forces v = 0
    and expr <= 0; expr = 0 admits either b with v = 0).
    """
    if bound <= 0:
        raise ValueError("pos-part bound must be positive")
    e = LinExpr.of(expr)
    v = model.add_continuous(lb=0.0, ub=bound, name=name)
    b = model.add_binary(name=f"{name}_sign")
    model.add(v, ">=", e, name=f"{name}_ge_expr")
    model.add(v, "<=", e + bound * (1.0 - LinExpr.of(b)), name=f"{name}_le_expr")
    model.add(v, "<=", bound * LinExpr.of(b), name=f"{name}_le_gate")
    return v


def linearize_shortfall_indicator(
    model: Model, target_minus_charge, bound: float, eps: float = 1e-3, name: str = "short"
) -> Variable:
    """Binary z = 1 iff the charge shortfall is at least ``eps``.

    Requires 0 <= shortfall <= bound at feasible points.  z = 0 forces the
    shortfall to 0, z = 1 forces it into [eps, bound]; shortfalls inside
    (0, eps) are cut off, which is the advertised construction tolerance.
    A zero bound degenerates to a constant 0 (nothing to fall short of).
    """
    e = LinExpr.of(target_minus_charge)
    z = model.add_binary(name=name)
    if bound <= 0.0:
        model.fix(z, 0.0)
        return z
    if eps <= 0 or eps >= bound:
        raise ValueError(f"indicator tolerance must satisfy 0 < eps < bound, got {eps} vs {bound}")
    model.add(e, "<=", bound * LinExpr.of(z), name=f"{name}_le_gate")
    model.add(e, ">=", eps * LinExpr.of(z), name=f"{name}_ge_eps")
    return z


def linearize_leave_rule(
    model: Model,
    vacancy_sum,
    vmax: float,
    name: str = "leave",
    var: Variable | None = None,
) -> Variable:
    """Binary x = 1 iff the (nonnegative integer) vacancy sum is zero.

    Exact for vacancy sums taking integer values in [0, vmax]: x = 1 pins
    the sum to 0, x = 0 requires at least 1.  Pass ``var`` to constrain an
    existing binary instead of declaring a fresh one.
    """
    if vmax < 1:
        raise ValueError("leave rule needs a vacancy bound of at least 1")
    if var is not None and var.kind != BINARY:
        raise ValueError("leave rule target must be binary")
    e = LinExpr.of(vacancy_sum)
    x = var if var is not None else model.add_binary(name=name)
    model.add(e, ">=", 1.0 - LinExpr.of(x), name=f"{name}_ge_one")
    model.add(e, "<=", vmax * (1.0 - LinExpr.of(x)), name=f"{name}_le_gate")
    return x


# -- solving ---------------------------------------------------------------


@dataclass
class SolveResult:
    """Outcome of one solve; ``values`` is indexed by variable index."""

    status: str  # 'optimal' | 'feasible' | 'infeasible' | 'time_limit'
    objective: float | None = None
    values: np.ndarray | None = None
    mip_gap: float = 0.0
    wall_time_s: float = 0.0
    message: str = ""
    dual_bound: float | None = None  # proven lower bound on the objective

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "feasible") or (
            self.status == "time_limit" and self.values is not None
        )

    def value(self, x) -> float:
        if self.values is None:
            raise SolverError(f"no incumbent available (status {self.status})")
        if isinstance(x, Variable):
            return float(self.values[x.index])
        return float(LinExpr.of(x).value(self.values))


def _matrices(model: Model):
    n = len(model.variables)
    c = np.zeros(n)
    for i, coef in model.objective.terms.items():
        c[i] = coef
    rows, cols, data, lo, hi = [], [], [], [], []
    for r, con in enumerate(model.constraints):
        for i, coef in con.terms.items():
            rows.append(r)
            cols.append(i)
            data.append(coef)
        if con.sense == "<=":
            lo.append(-np.inf)
            hi.append(con.rhs)
        elif con.sense == ">=":
            lo.append(con.rhs)
            hi.append(np.inf)
        else:
            lo.append(con.rhs)
            hi.append(con.rhs)
    a = scipy.sparse.csc_array(
        (data, (rows, cols)), shape=(len(model.constraints), n)
    )
    return c, a, np.array(lo), np.array(hi)


def _snap(model: Model, x: np.ndarray) -> np.ndarray:
    """Round integer values and clip to bounds, rejecting real violations."""
    out = x.copy()
    for v in model.variables:
        val = out[v.index]
        if v.kind != CONTINUOUS:
            r = round(val)
            if abs(val - r) > 1e-5:
                raise SolverError(
                    f"backend returned non-integral value {val} for {v.name}"
                )
            val = float(r)
        if val < v.lb - _FEAS_TOL or val > v.ub + _FEAS_TOL:
            raise SolverError(
                f"backend violated bounds for {v.name}: {val} not in [{v.lb}, {v.ub}]"
            )
        out[v.index] = min(max(val, v.lb), v.ub)
    return out


def solve(
    model: Model,
    mip_gap: float = 0.01,
    time_limit: float | None = None,
    solver_options: dict | None = None,
) -> SolveResult:
    """Minimize the model's objective with HiGHS via scipy.

    ``mip_gap`` is the relative optimality gap at which the search stops;
    results that stop within it report status 'optimal' (with the achieved
    gap), incumbents beyond it report 'feasible', and a hit time limit
    reports 'time_limit' with the incumbent when one exists.
    ``solver_options`` entries go to HiGHS verbatim (e.g. a heavier
    ``mip_heuristic_effort`` for hard packing instances).
    """
    start = time.perf_counter()
    if not model.variables:
        obj = model.objective.constant
        return SolveResult("optimal", obj, np.zeros(0), 0.0, 0.0, "empty model")

    c, a, lo, hi = _matrices(model)
    integrality = np.array(
        [0 if v.kind == CONTINUOUS else 1 for v in model.variables]
    )
    bounds = scipy.optimize.Bounds(
        np.array([v.lb for v in model.variables]),
        np.array([v.ub for v in model.variables]),
    )
    constraints = (
        scipy.optimize.LinearConstraint(a, lo, hi) if model.constraints else ()
    )
    options: dict = {"mip_rel_gap": float(mip_gap)}
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    if solver_options:
        options.update(solver_options)
    with warnings.catch_warnings():
        # scipy warns that non-scipy option names go to HiGHS verbatim,
        # which is exactly what solver_options is for
        warnings.simplefilter("ignore", RuntimeWarning)
        res = scipy.optimize.milp(
            c=c,
            constraints=constraints,
            integrality=integrality,
            bounds=bounds,
            options=options,
        )
    wall = time.perf_counter() - start

    gap = float(res.mip_gap) if getattr(res, "mip_gap", None) is not None else 0.0
    raw_bound = getattr(res, "mip_dual_bound", None)
    bound = (
        float(raw_bound) + model.objective.constant
        if raw_bound is not None and np.isfinite(raw_bound)
        else None
    )
    if res.status == 0:
        x = _snap(model, res.x)
        status = "optimal" if gap <= mip_gap + 1e-9 else "feasible"
        obj = float(c @ x) + model.objective.constant
        if bound is None:
            bound = obj
        return SolveResult(status, obj, x, gap, wall, res.message, bound)
    if res.status == 1:  # iteration/time limit
        if res.x is not None:
            x = _snap(model, res.x)
            obj = float(c @ x) + model.objective.constant
            return SolveResult("time_limit", obj, x, gap, wall, res.message, bound)
        return SolveResult("time_limit", None, None, math.inf, wall, res.message, bound)
    if res.status == 2:
        return SolveResult("infeasible", None, None, math.inf, wall, res.message)
    raise SolverError(f"backend failure (status {res.status}): {res.message}")


# -- exhaustive enumeration oracle ----------------------------------------


def enumerate_oracle(
    model: Model,
    domains: dict[Variable, list[float]] | None = None,
    max_points: int = 10_000_000,
) -> SolveResult:
    """Brute-force the model: try every discrete assignment, solve the rest.

    Discrete variables are enumerated over their (finite) bound ranges;
    ``domains`` optionally pins any variable, including continuous ones, to
    a caller-supplied finite grid.  Continuous variables not in ``domains``
    are resolved per fixing by a linear program.  Deliberately independent
    of :func:`solve` so the two can cross-check each other.
    """
    start = time.perf_counter()
    domains = {v.index: list(vals) for v, vals in (domains or {}).items()}

    fixed_sets: list[tuple[int, list[float]]] = []
    free_cont: list[Variable] = []
    for v in model.variables:
        if v.index in domains:
            fixed_sets.append((v.index, domains[v.index]))
        elif v.kind == CONTINUOUS:
            free_cont.append(v)
        else:
            if not (math.isfinite(v.lb) and math.isfinite(v.ub)):
                raise ValueError(f"cannot enumerate unbounded variable {v.name}")
            vals = [float(k) for k in range(int(math.ceil(v.lb)), int(math.floor(v.ub)) + 1)]
            fixed_sets.append((v.index, vals))

    space = 1
    for _, vals in fixed_sets:
        space *= max(len(vals), 1)
        if space > max_points:
            raise ValueError(f"enumeration space exceeds {max_points} points")

    if not model.variables:
        return SolveResult("optimal", model.objective.constant, np.zeros(0))

    free_idx = [v.index for v in free_cont]
    pos_of = {idx: k for k, idx in enumerate(free_idx)}
    best_obj = math.inf
    best_x: np.ndarray | None = None

    for combo in itertools.product(*(vals for _, vals in fixed_sets)):
        point = dict(zip((idx for idx, _ in fixed_sets), combo))
        # check bounds of the fixed values themselves
        ok = True
        for idx, val in point.items():
            v = model.variables[idx]
            if val < v.lb - 1e-9 or val > v.ub + 1e-9:
                ok = False
                break
        if not ok:
            continue

        if free_idx:
            a_ub, b_ub, a_eq, b_eq = [], [], [], []
            for con in model.constraints:
                row = np.zeros(len(free_idx))
                const = 0.0
                for i, coef in con.terms.items():
                    if i in pos_of:
                        row[pos_of[i]] = coef
                    else:
                        const += coef * point[i]
                rhs = con.rhs - const
                if con.sense == "<=":
                    a_ub.append(row)
                    b_ub.append(rhs)
                elif con.sense == ">=":
                    a_ub.append(-row)
                    b_ub.append(-rhs)
                else:
                    a_eq.append(row)
                    b_eq.append(rhs)
            cvec = np.zeros(len(free_idx))
            const_obj = model.objective.constant
            for i, coef in model.objective.terms.items():
                if i in pos_of:
                    cvec[pos_of[i]] = coef
                else:
                    const_obj += coef * point[i]
            lp = scipy.optimize.linprog(
                cvec,
                A_ub=np.array(a_ub) if a_ub else None,
                b_ub=np.array(b_ub) if b_ub else None,
                A_eq=np.array(a_eq) if a_eq else None,
                b_eq=np.array(b_eq) if b_eq else None,
                bounds=[(v.lb, v.ub) for v in free_cont],
                method="highs",
            )
            if not lp.success:
                continue
            obj = const_obj + float(lp.fun)
            if obj < best_obj - 1e-12:
                best_obj = obj
                best_x = np.zeros(len(model.variables))
                for idx, val in point.items():
                    best_x[idx] = val
                for k, idx in enumerate(free_idx):
                    best_x[idx] = lp.x[k]
        else:
            feasible = True
            for con in model.constraints:
                lhs = sum(coef * point[i] for i, coef in con.terms.items())
                if con.sense == "<=" and lhs > con.rhs + 1e-9:
                    feasible = False
                elif con.sense == ">=" and lhs < con.rhs - 1e-9:
                    feasible = False
                elif con.sense == "==" and abs(lhs - con.rhs) > 1e-9:
                    feasible = False
                if not feasible:
                    break
            if not feasible:
                continue
            obj = model.objective.constant + sum(
                coef * point[i] for i, coef in model.objective.terms.items()
            )
            if obj < best_obj - 1e-12:
                best_obj = obj
                best_x = np.zeros(len(model.variables))
                for idx, val in point.items():
                    best_x[idx] = val

    wall = time.perf_counter() - start
    if best_x is None:
        return SolveResult("infeasible", None, None, math.inf, wall, "enumeration")
    return SolveResult("optimal", best_obj, best_x, 0.0, wall, "enumeration")


# -- LP-format serialization ----------------------------------------------


def _lp_name(var: Variable) -> str:
    clean = re.sub(r"[^A-Za-z0-9_.]", "_", var.name)
    if not clean or clean[0].isdigit():
        clean = f"v_{clean}"
    return f"{clean}_{var.index}"


def _fmt(x: float) -> str:
    return repr(float(x))


def _emit_terms(terms: dict[int, float], names: dict[int, str]) -> str:
    if not terms:
        return "0"
    parts = []
    for i in sorted(terms):
        c = terms[i]
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {_fmt(abs(c))} {names[i]}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def write_lp(model: Model, path_or_buf) -> None:
    """Serialize the model in CPLEX-LP style text."""
    names = {v.index: _lp_name(v) for v in model.variables}
    buf = io.StringIO()
    buf.write(f"\\ {model.name}\n")
    buf.write("Minimize\n")
    obj = _emit_terms(model.objective.terms, names)
    if model.objective.constant:
        c = model.objective.constant
        obj += f" {'-' if c < 0 else '+'} {_fmt(abs(c))}"
    buf.write(f" obj: {obj}\n")
    buf.write("Subject To\n")
    for con in model.constraints:
        sense = {"<=": "<=", ">=": ">=", "==": "="}[con.sense]
        cname = re.sub(r"[^A-Za-z0-9_.]", "_", con.name)
        buf.write(f" {cname}: {_emit_terms(con.terms, names)} {sense} {_fmt(con.rhs)}\n")
    buf.write("Bounds\n")
    for v in model.variables:
        lo = "-inf" if v.lb == -math.inf else _fmt(v.lb)
        hi = "+inf" if v.ub == math.inf else _fmt(v.ub)
        buf.write(f" {lo} <= {names[v.index]} <= {hi}\n")
    generals = [names[v.index] for v in model.variables if v.kind == INTEGER]
    binaries = [names[v.index] for v in model.variables if v.kind == BINARY]
    if generals:
        buf.write("Generals\n " + " ".join(generals) + "\n")
    if binaries:
        buf.write("Binaries\n " + " ".join(binaries) + "\n")
    buf.write("End\n")
    text = buf.getvalue()
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(text)
    else:
        with open(path_or_buf, "w") as fh:
            fh.write(text)


def _parse_terms(text: str, index_of: dict[str, int]) -> tuple[dict[int, float], float]:
    terms: dict[int, float] = {}
    constant = 0.0
    pos = 0
    text = text.strip()
    if text == "0":
        return terms, 0.0
    token_re = re.compile(
        r"\s*([+-])?\s*([0-9][0-9.eE]*(?:[+-][0-9]+)?)\s*([A-Za-z_][A-Za-z0-9_.]*)?"
    )
    while pos < len(text):
        m = token_re.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse LP terms at: {text[pos:]!r}")
        sign = -1.0 if m.group(1) == "-" else 1.0
        coef = sign * float(m.group(2))
        name = m.group(3)
        if name is None:
            constant += coef
        else:
            idx = index_of[name]
            terms[idx] = terms.get(idx, 0.0) + coef
        pos = m.end()
    return terms, constant


def read_lp(source) -> Model:
    """Parse text produced by :func:`write_lp` back into a Model."""
    text = source.read() if hasattr(source, "read") else source
    if "\n" not in text and not text.lstrip().startswith("\\"):
        with open(text) as fh:
            text = fh.read()
    lines = [ln.rstrip() for ln in text.splitlines()]

    name = "model"
    sections: dict[str, list[str]] = {k: [] for k in ("objective", "st", "bounds", "generals", "binaries")}
    mode = None
    for ln in lines:
        stripped = ln.strip()
        if not stripped:
            continue
        if stripped.startswith("\\"):
            name = stripped[1:].strip() or name
            continue
        low = stripped.lower()
        if low == "minimize":
            mode = "objective"
            continue
        if low == "subject to":
            mode = "st"
            continue
        if low == "bounds":
            mode = "bounds"
            continue
        if low == "generals":
            mode = "generals"
            continue
        if low == "binaries":
            mode = "binaries"
            continue
        if low == "end":
            break
        if mode is None:
            raise ValueError(f"LP text outside any section: {stripped!r}")
        sections[mode].append(stripped)

    bound_re = re.compile(r"^(\S+)\s*<=\s*(\S+)\s*<=\s*(\S+)$")
    var_specs: list[tuple[str, float, float]] = []
    for ln in sections["bounds"]:
        m = bound_re.match(ln)
        if not m:
            raise ValueError(f"bad bounds line: {ln!r}")
        lo = -math.inf if m.group(1) == "-inf" else float(m.group(1))
        hi = math.inf if m.group(3) == "+inf" else float(m.group(3))
        var_specs.append((m.group(2), lo, hi))

    general_names = set(" ".join(sections["generals"]).split())
    binary_names = set(" ".join(sections["binaries"]).split())

    model = Model(name=name)
    index_of: dict[str, int] = {}
    for vname, lo, hi in var_specs:
        if vname in binary_names:
            var = model.add_binary(name=vname)
        elif vname in general_names:
            var = model.add_integer(lo, hi, name=vname)
        else:
            var = model.add_continuous(lo, hi, name=vname)
        index_of[vname] = var.index

    for ln in sections["objective"]:
        body = ln.split(":", 1)[1] if ":" in ln else ln
        terms, const = _parse_terms(body, index_of)
        model.objective = LinExpr(terms, const)

    con_re = re.compile(r"^(\S+):\s*(.*?)\s*(<=|>=|=)\s*(\S+)$")
    for ln in sections["st"]:
        m = con_re.match(ln)
        if not m:
            raise ValueError(f"bad constraint line: {ln!r}")
        terms, const = _parse_terms(m.group(2), index_of)
        sense = {"<=": "<=", ">=": ">=", "=": "=="}[m.group(3)]
        rhs = float(m.group(4)) - const
        model.constraints.append(_Constraint(terms, sense, rhs, m.group(1)))
    return model
