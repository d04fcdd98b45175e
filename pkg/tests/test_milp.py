import io
import math

import numpy as np
import pytest

from robocharge.milp import (
    LinExpr,
    Model,
    enumerate_oracle,
    lin_sum,
    linearize_and,
    linearize_leave_rule,
    linearize_pos_part,
    linearize_shortfall_indicator,
    read_lp,
    solve,
    write_lp,
)


def pinned(model: Model, target, expect: float, grids=None) -> None:
    """Assert ``target`` equals ``expect`` at every feasible point.

    Minimizing and maximizing must both land on the truth value, through
    the enumeration oracle and the MILP backend alike.
    """
    for sign in (1.0, -1.0):
        model.set_objective(LinExpr.of(target) * sign)
        byenum = enumerate_oracle(model, domains=grids)
        bysolver = solve(model, mip_gap=1e-9)
        assert byenum.status == "optimal", byenum.message
        assert bysolver.status == "optimal", bysolver.message
        assert byenum.objective == pytest.approx(sign * expect, abs=1e-7)
        assert bysolver.objective == pytest.approx(sign * expect, abs=1e-7)


class TestLinExpr:
    def test_arithmetic(self):
        m = Model()
        x = m.add_continuous(name="x")
        y = m.add_continuous(name="y")
        e = 2 * LinExpr.of(x) - LinExpr.of(y) * 3 + 5
        assert e.terms == {x.index: 2.0, y.index: -3.0}
        assert e.constant == 5.0
        vals = np.array([1.0, 2.0])
        assert e.value(vals) == pytest.approx(2 - 6 + 5)

    def test_lin_sum_merges(self):
        m = Model()
        xs = [m.add_binary() for _ in range(4)]
        e = lin_sum(xs) + lin_sum([LinExpr.of(xs[0]) * 2, 1.5])
        assert e.terms[xs[0].index] == pytest.approx(3.0)
        assert e.constant == pytest.approx(1.5)


class TestAndGadget:
    @pytest.mark.parametrize("a_val,b_val", [(0, 0), (0, 1), (1, 0), (1, 1)])
    def test_truth_table(self, a_val, b_val):
        m = Model()
        a, b = m.add_binary("a"), m.add_binary("b")
        w = linearize_and(m, a, b)
        m.fix(a, a_val)
        m.fix(b, b_val)
        pinned(m, w, float(a_val and b_val))

    def test_rejects_non_binary(self):
        m = Model()
        x = m.add_continuous(name="x")
        b = m.add_binary()
        with pytest.raises(ValueError):
            linearize_and(m, x, b)


class TestPosPartGadget:
    @pytest.mark.parametrize("x_val", [-2, -1, 0, 1, 3])
    def test_pins_positive_part(self, x_val):
        m = Model()
        x = m.add_integer(-2, 3, name="x")
        v = linearize_pos_part(m, x, bound=5.0)
        m.fix(x, x_val)
        pinned(m, v, float(max(x_val, 0)))

    def test_works_on_expressions(self):
        # v = [2 - q]+ over q in 0..4
        for q_val in range(5):
            m = Model()
            q = m.add_integer(0, 4, name="q")
            v = linearize_pos_part(m, 2.0 - LinExpr.of(q), bound=6.0)
            m.fix(q, q_val)
            pinned(m, v, float(max(2 - q_val, 0)))

    def test_rejects_bad_bound(self):
        m = Model()
        x = m.add_integer(0, 1)
        with pytest.raises(ValueError):
            linearize_pos_part(m, x, bound=0.0)


class TestShortfallIndicator:
    def test_zero_shortfall_forces_zero(self):
        m = Model()
        s = m.add_continuous(0.0, 10.0, name="shortfall")
        z = linearize_shortfall_indicator(m, s, bound=10.0, eps=1e-3)
        m.fix(s, 0.0)
        pinned(m, z, 0.0, grids={s: [0.0]})

    @pytest.mark.parametrize("s_val", [1e-3, 0.5, 10.0])
    def test_real_shortfall_forces_one(self, s_val):
        m = Model()
        s = m.add_continuous(0.0, 10.0, name="shortfall")
        z = linearize_shortfall_indicator(m, s, bound=10.0, eps=1e-3)
        m.fix(s, s_val)
        pinned(m, z, 1.0, grids={s: [s_val]})

    def test_sub_eps_sliver_is_cut_off(self):
        m = Model()
        s = m.add_continuous(0.0, 10.0, name="shortfall")
        linearize_shortfall_indicator(m, s, bound=10.0, eps=1e-3)
        m.fix(s, 5e-4)
        m.set_objective(LinExpr())
        assert enumerate_oracle(m, domains={s: [5e-4]}).status == "infeasible"
        assert solve(m).status == "infeasible"

    def test_zero_bound_degenerates(self):
        m = Model()
        s = m.add_continuous(0.0, 0.0, name="shortfall")
        z = linearize_shortfall_indicator(m, s, bound=0.0)
        pinned(m, z, 0.0, grids={s: [0.0]})

    def test_rejects_bad_eps(self):
        m = Model()
        s = m.add_continuous(0.0, 1.0)
        with pytest.raises(ValueError):
            linearize_shortfall_indicator(m, s, bound=1.0, eps=2.0)
        with pytest.raises(ValueError):
            linearize_shortfall_indicator(m, s, bound=1.0, eps=0.0)


class TestLeaveRule:
    @pytest.mark.parametrize("vsum", [0, 1, 2, 5])
    def test_flags_exactly_zero_vacancies(self, vsum):
        m = Model()
        v = m.add_integer(0, 5, name="vacancies")
        x = linearize_leave_rule(m, v, vmax=5.0)
        m.fix(v, vsum)
        pinned(m, x, 1.0 if vsum == 0 else 0.0)

    def test_rejects_tiny_vmax(self):
        m = Model()
        v = m.add_integer(0, 5)
        with pytest.raises(ValueError):
            linearize_leave_rule(m, v, vmax=0.5)


class TestSolve:
    def test_knapsack(self):
        m = Model()
        x, y = m.add_binary("x"), m.add_binary("y")
        m.add(lin_sum([x, y]), "<=", 1)
        m.set_objective(-3 * LinExpr.of(x) - 4 * LinExpr.of(y))
        res = solve(m, mip_gap=1e-9)
        assert res.status == "optimal"
        assert res.objective == pytest.approx(-4.0)
        assert res.value(y) == pytest.approx(1.0)
        assert res.value(x) == pytest.approx(0.0)

    def test_infeasible(self):
        m = Model()
        x = m.add_continuous(0.0, 1.0)
        m.add(x, ">=", 2.0)
        assert solve(m).status == "infeasible"

    def test_empty_model(self):
        m = Model()
        m.set_objective(LinExpr({}, 7.0))
        res = solve(m)
        assert res.status == "optimal"
        assert res.objective == pytest.approx(7.0)

    def test_integer_bounds_tighten_to_integers(self):
        m = Model()
        x = m.add_integer(0.2, 2.8, name="x")
        assert (x.lb, x.ub) == (1.0, 2.0)

    def test_expression_values_via_result(self):
        m = Model()
        x = m.add_continuous(0.0, 4.0)
        m.add(x, ">=", 1.5)
        m.set_objective(LinExpr.of(x))
        res = solve(m)
        assert res.value(2 * LinExpr.of(x) + 1) == pytest.approx(4.0)


class TestSolveAgainstOracle:
    def test_random_models_agree(self):
        rng = np.random.default_rng(7)
        for trial in range(40):
            m = Model(name=f"rand{trial}")
            nb = rng.integers(1, 5)
            nc = rng.integers(0, 3)
            bins = [m.add_binary(f"b{k}") for k in range(nb)]
            conts = [m.add_continuous(0.0, 5.0, name=f"y{k}") for k in range(nc)]
            allvars = bins + conts
            for k in range(rng.integers(1, 5)):
                coefs = rng.integers(-3, 4, size=len(allvars))
                expr = lin_sum(c * LinExpr.of(v) for c, v in zip(coefs, allvars))
                rhs = float(rng.integers(-2, 7))
                m.add(expr, "<=" if rng.random() < 0.7 else ">=", rhs)
            obj_coefs = rng.integers(-4, 5, size=len(allvars))
            m.set_objective(
                lin_sum(c * LinExpr.of(v) for c, v in zip(obj_coefs, allvars))
            )
            a = solve(m, mip_gap=1e-9)
            b = enumerate_oracle(m)
            assert a.status == b.status or (
                a.status in ("optimal", "feasible") and b.status == "optimal"
            ), f"trial {trial}: {a.status} vs {b.status}"
            if b.status == "optimal" and a.ok:
                # HiGHS keeps feasibility to ~1e-7 per row; at coefficient
                # scale ~30 the objective can drift a few 1e-6.
                assert a.objective == pytest.approx(b.objective, abs=2e-5), f"trial {trial}"

    def test_oracle_refuses_unbounded_discrete(self):
        m = Model()
        m.add_integer(0, math.inf, name="n")
        with pytest.raises(ValueError):
            enumerate_oracle(m)

    def test_oracle_respects_max_points(self):
        m = Model()
        for _ in range(24):
            m.add_binary()
        with pytest.raises(ValueError):
            enumerate_oracle(m, max_points=1000)


class TestLpRoundTrip:
    def build(self) -> Model:
        m = Model(name="roundtrip")
        x = m.add_binary("plug[0,1]")
        y = m.add_integer(-2, 7, name="queue len")
        z = m.add_continuous(-math.inf, math.inf, name="free")
        w = m.add_continuous(0.5, 2.5, name="power")
        m.add(2 * LinExpr.of(x) - 0.25 * LinExpr.of(y) + LinExpr.of(z), "<=", 4.5)
        m.add(LinExpr.of(w) + LinExpr.of(y), ">=", -3.0)
        m.add(LinExpr.of(x) + LinExpr.of(w), "==", 1.75)
        m.set_objective(1.5 * LinExpr.of(x) - LinExpr.of(w) + 0.125)
        return m

    def test_identical_matrices_after_round_trip(self):
        m = self.build()
        buf = io.StringIO()
        write_lp(m, buf)
        m2 = read_lp(buf.getvalue())

        assert len(m2.variables) == len(m.variables)
        for v1, v2 in zip(m.variables, m2.variables):
            assert v1.kind == v2.kind
            assert v1.lb == v2.lb and v1.ub == v2.ub
        assert len(m2.constraints) == len(m.constraints)
        for c1, c2 in zip(m.constraints, m2.constraints):
            assert c1.sense == c2.sense
            assert c1.terms == c2.terms
            assert c1.rhs == pytest.approx(c2.rhs, abs=1e-12)
        assert m2.objective.terms == m.objective.terms
        assert m2.objective.constant == pytest.approx(m.objective.constant)

    def test_round_trip_solves_identically(self):
        m = self.build()
        buf = io.StringIO()
        write_lp(m, buf)
        m2 = read_lp(buf.getvalue())
        r1, r2 = solve(m, mip_gap=1e-9), solve(m2, mip_gap=1e-9)
        assert r1.status == r2.status == "optimal"
        assert r1.objective == pytest.approx(r2.objective, abs=1e-9)
