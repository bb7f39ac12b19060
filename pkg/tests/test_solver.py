import io

import numpy as np
import pytest

from aavr.solver import LinearProgram, solve_lp, solve_milp, write_lp
from oracles import enumerate_binary_program, random_binary_program


def lp_2d(c, A, relations, b, **kw):
    n = len(c)
    kw.setdefault("lower", np.zeros(n))
    kw.setdefault("upper", np.full(n, np.inf))
    return LinearProgram(objective=np.array(c, float), A=np.array(A, float),
                         relations=relations, b=np.array(b, float), **kw)


def test_program_validation():
    with pytest.raises(ValueError, match="objective"):
        lp_2d([1.0], [[1.0, 1.0]], ["<="], [1.0])
    with pytest.raises(ValueError, match="relation"):
        lp_2d([1.0, 1.0], [[1.0, 1.0]], ["<"], [1.0])
    with pytest.raises(ValueError, match="sense"):
        lp_2d([1.0, 1.0], [[1.0, 1.0]], ["<="], [1.0], sense="maximize")
    with pytest.raises(ValueError, match="lower bound above"):
        lp_2d([1.0], [[1.0]], ["<="], [1.0],
              lower=np.array([2.0]), upper=np.array([1.0]))
    with pytest.raises(ValueError, match="non-finite"):
        lp_2d([1.0], [[np.nan]], ["<="], [1.0])


def test_binary_flag_tightens_bounds():
    lp = lp_2d([1.0, 1.0], [[1.0, 1.0]], ["<="], [5.0],
               integrality=["binary", "continuous"])
    assert lp.integrality.tolist() == [True, False]
    assert lp.upper[0] == 1.0 and np.isinf(lp.upper[1])


def test_lp_known_optimum():
    # max x+y st x+2y<=4, 3x+y<=6 -> (1.6, 1.2)
    lp = lp_2d([1.0, 1.0], [[1.0, 2.0], [3.0, 1.0]], ["<=", "<="], [4.0, 6.0])
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert np.allclose(sol.values, [1.6, 1.2])
    assert sol.objective_value == pytest.approx(2.8)


def test_lp_equality_and_min_sense():
    lp = lp_2d([2.0, 3.0], [[1.0, 1.0]], ["="], [10.0], sense="min")
    sol = solve_lp(lp)
    assert sol.values == pytest.approx([10.0, 0.0])
    assert sol.objective_value == pytest.approx(20.0)


def test_lp_infeasible_and_unbounded():
    bad = lp_2d([1.0], [[1.0]], [">="], [2.0], upper=np.array([1.0]))
    assert solve_lp(bad).status == "infeasible"
    free = lp_2d([1.0], [[1.0]], [">="], [0.0])
    assert solve_lp(free).status == "unbounded"


def test_lp_negative_lower_bounds():
    lp = lp_2d([1.0], [[1.0]], ["<="], [-2.0],
               lower=np.array([-5.0]), upper=np.array([5.0]))
    sol = solve_lp(lp)
    assert sol.values[0] == pytest.approx(-2.0)


def test_milp_knapsack():
    # values 6,10,12 weights 1,2,3, cap 5 -> take items 2,3 = 22
    lp = lp_2d([6.0, 10.0, 12.0], [[1.0, 2.0, 3.0]], ["<="], [5.0],
               upper=np.ones(3), integrality=np.ones(3, bool))
    sol = solve_milp(lp)
    assert sol.status == "optimal"
    assert sol.objective_value == pytest.approx(22.0)
    assert np.allclose(sol.values, [0.0, 1.0, 1.0])


def test_milp_integrality_changes_the_answer():
    lp_cont = lp_2d([1.0], [[2.0]], ["<="], [3.0], upper=np.array([5.0]))
    assert solve_lp(lp_cont).objective_value == pytest.approx(1.5)
    lp_int = lp_2d([1.0], [[2.0]], ["<="], [3.0], upper=np.array([5.0]),
                   integrality=[True])
    sol = solve_milp(lp_int)
    assert sol.objective_value == pytest.approx(1.0)
    assert float(sol.values[0]).is_integer()


def test_milp_mixed_integer_continuous():
    # max 3x + y st x + y <= 2.5, x integer, y continuous
    lp = lp_2d([3.0, 1.0], [[1.0, 1.0]], ["<="], [2.5],
               upper=np.array([10.0, 10.0]), integrality=[True, False])
    sol = solve_milp(lp)
    assert sol.values[0] == pytest.approx(2.0)
    assert sol.values[1] == pytest.approx(0.5)
    assert sol.objective_value == pytest.approx(6.5)


def test_milp_infeasible_integer():
    # 0.4 <= x <= 0.6 has no integer point
    lp = lp_2d([1.0], [[1.0]], [">="], [0.4],
               upper=np.array([0.6]), integrality=[True])
    assert solve_milp(lp).status == "infeasible"


def test_milp_matches_enumeration_sweep():
    rng = np.random.default_rng(7)
    for _ in range(15):
        lp = random_binary_program(rng, n_max=8)
        sol = solve_milp(lp)
        best, _ = enumerate_binary_program(lp.objective, lp.A, lp.relations,
                                           lp.b, sense=lp.sense)
        if best is None:
            assert sol.status == "infeasible"
        else:
            assert sol.status == "optimal"
            assert sol.objective_value == pytest.approx(best, abs=1e-9)


def test_milp_node_budget_returns_an_incumbent():
    rng = np.random.default_rng(11)
    lp = random_binary_program(rng, n_max=10)
    sol = solve_milp(lp, node_budget=10_000)
    assert sol.status in ("optimal", "node_budget", "infeasible")
    if sol.values is not None:
        lhs = lp.A @ sol.values
        for i, rel in enumerate(lp.relations):
            if rel == "<=":
                assert lhs[i] <= lp.b[i] + 1e-7
            elif rel == ">=":
                assert lhs[i] >= lp.b[i] - 1e-7
            else:
                assert lhs[i] == pytest.approx(lp.b[i], abs=1e-7)
        ints = np.flatnonzero(lp.integrality)
        assert np.allclose(sol.values[ints], np.rint(sol.values[ints]))


def test_write_lp_format():
    lp = lp_2d([1.0, -2.0], [[1.0, 1.0], [1.0, -1.0]], ["<=", ">="],
               [4.0, 0.0], upper=np.array([3.0, np.inf]),
               integrality=[True, False],
               variable_names=["alpha", "beta"],
               constraint_names=["cap", "order"], name="demo")
    buf = io.StringIO()
    write_lp(lp, buf)
    text = buf.getvalue()
    assert "\\ Problem: demo" in text
    assert "Maximize" in text
    assert "cap: 1 alpha + 1 beta <= 4" in text
    assert "order: 1 alpha - 1 beta >= 0" in text
    assert "Generals" in text and "alpha" in text.split("Generals")[1]
    assert text.rstrip().endswith("End")


def test_write_lp_to_path(tmp_path):
    lp = lp_2d([1.0], [[1.0]], ["<="], [1.0])
    target = tmp_path / "m.lp"
    write_lp(lp, target)
    assert target.read_text().startswith("\\ Problem:")
