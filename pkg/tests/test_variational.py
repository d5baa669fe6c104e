import numpy as np
import pytest
from scipy.optimize import linprog

from sqwelfare.empirical import cdf, make_sample
from sqwelfare.errors import EmptySample, LpNumericalFailure, NonFiniteValue
from sqwelfare.simplex import simplex_max
from sqwelfare.variational import (
    PluginProgram,
    closed_form_value,
    interpret_solution,
    solve_breakpoints,
    solve_simplex_lp,
)

FIVE = [10, 20, 30, 40, 50]


def test_breakpoint_objective_values():
    p = PluginProgram(FIVE, 0.5)
    np.testing.assert_allclose(p.objective(np.array(FIVE, dtype=float)), [10, 16, 18, 16, 10])
    sol = solve_breakpoints(p)
    assert sol.lambda_hat == 30 and sol.objective == pytest.approx(18)
    assert sol.z == pytest.approx((-20, -10, 0, 0, 0))


def test_breakpoint_edge_cases():
    sol = solve_breakpoints(PluginProgram([4.0] * 6, 0.3))
    assert sol.lambda_hat == 4.0 and sol.objective == pytest.approx(4.0)
    sol = solve_breakpoints(PluginProgram(FIVE, 1.0))
    assert sol.lambda_hat == 50 and sol.objective == pytest.approx(30)


def test_simplex_examples():
    assert solve_simplex_lp(PluginProgram(FIVE, 0.5)).objective == pytest.approx(18)
    sol = solve_simplex_lp(PluginProgram([-5, 5], 0.5))
    assert sol.objective == pytest.approx(-5)
    assert sol.lambda_hat in (pytest.approx(-5), pytest.approx(5))
    assert solve_simplex_lp(PluginProgram([7.0], 0.3)).objective == pytest.approx(7)
    # ties resolve to the smallest breakpoint on the enumeration path
    assert solve_breakpoints(PluginProgram([-5, 5], 0.5)).lambda_hat == -5


def test_interpretation():
    p = PluginProgram(FIVE, 0.5)
    info = interpret_solution(solve_breakpoints(p), p)
    assert info == {"beta": 0.5, "beta_quantile_estimate": 30.0, "superquantile_estimate": 18.0, "n_binding": 2}
    p = PluginProgram([2.0, 2.0, 2.0], 0.4)
    assert interpret_solution(solve_simplex_lp(p), p)["n_binding"] == 0
    p = PluginProgram([1.0, 2.0, 6.0], 1.0)
    assert interpret_solution(solve_simplex_lp(p), p)["superquantile_estimate"] == pytest.approx(3.0)


def test_program_validation():
    with pytest.raises(EmptySample):
        PluginProgram([], 0.5)
    with pytest.raises(NonFiniteValue):
        PluginProgram([1.0, np.inf], 0.5)


def test_paths_agree_on_random_programs():
    rng = np.random.default_rng(99)
    draws = [
        lambda k: rng.normal(size=k),
        lambda k: rng.exponential(size=k) * 10,
        lambda k: rng.integers(-3, 4, size=k).astype(float),
        lambda k: rng.standard_t(2, size=k),
    ]
    for i in range(200):
        k = int(rng.integers(1, 121))
        t = draws[i % 4](k)
        beta = float(rng.choice([0.05, 0.1, 0.25, 0.5, 0.75, 1.0]))
        w = rng.uniform(0.2, 3.0, k) if i % 3 == 0 else None
        p = PluginProgram(t, beta, w)
        bp = solve_breakpoints(p)
        lp = solve_simplex_lp(p)
        cf = closed_form_value(p)
        assert abs(bp.objective - lp.objective) <= 1e-8 * max(1, abs(cf))
        assert abs(bp.objective - cf) <= 1e-8 * max(1, abs(cf))
        assert lp.is_feasible(p) and bp.is_feasible(p)
        tt, ww = p.arrays()
        assert cdf(make_sample(tt, ww), bp.lambda_hat) >= beta - 1e-12


def test_objective_is_concave_in_lambda():
    rng = np.random.default_rng(5)
    for _ in range(50):
        p = PluginProgram(rng.normal(size=30), float(rng.uniform(0.05, 1.0)))
        lam = np.sort(rng.uniform(-4, 4, size=(200, 3)), axis=1)
        a, b, c = (p.objective(lam[:, i]) for i in range(3))
        t = (lam[:, 1] - lam[:, 0]) / np.maximum(lam[:, 2] - lam[:, 0], 1e-300)
        assert np.all(b >= (1 - t) * a + t * c - 1e-9)


def test_simplex_against_scipy_linprog():
    rng = np.random.default_rng(8)
    for _ in range(40):
        m, n = int(rng.integers(2, 8)), int(rng.integers(2, 8))
        A = rng.uniform(0.1, 2.0, size=(m, n))
        b = rng.uniform(0.5, 5.0, size=m)
        c = rng.normal(size=n)
        x, obj = simplex_max(c, A, b)
        ref = linprog(-c, A_ub=A, b_ub=b, bounds=[(0, None)] * n, method="highs")
        assert obj == pytest.approx(-ref.fun, abs=1e-9)
        assert np.all(A @ x <= b + 1e-9) and np.all(x >= -1e-12)


def test_simplex_failures():
    with pytest.raises(LpNumericalFailure):
        simplex_max(np.array([1.0]), np.array([[-1.0]]), np.array([1.0]))  # unbounded
    with pytest.raises(LpNumericalFailure):
        simplex_max(np.array([1.0]), np.array([[1.0]]), np.array([-1.0]))  # infeasible start
