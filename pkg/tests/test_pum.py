import numpy as np
import pytest

from sqwelfare.draws import NoiseSpec
from sqwelfare.errors import BadConfig, GroupMismatch, InvalidCovariate, InvalidSlackBound
from sqwelfare.pum import (
    PumScenario,
    TauDraws,
    check_appendix_properties,
    check_bounds_from_draws,
    check_theorem1,
    check_theorem2,
    conditional_cate_sample,
    draw_tau,
    indirect_utility,
    indirect_utility_draws,
    w_beta,
)
from sqwelfare.scenarios import random_bounded_pum, random_pum

from oracles import logsumexp_mean

GUMBEL = NoiseSpec("gumbel")
POINT = NoiseSpec("point", loc=0.0)
BETAS = (0.05, 0.1, 0.2, 0.5, 1.0)


def two_group_gumbel():
    u = np.array([[[0.0, 0.0], [0.0, 1.0]], [[0.0, 1.0], [0.5, 0.0]]])
    return PumScenario(u, [0.4, 0.6], GUMBEL)


def test_indirect_utility_examples():
    sc = PumScenario(np.zeros((2, 1, 2)), [1.0], GUMBEL)
    assert indirect_utility(sc, 0, 0, [0.3, -0.1]) == pytest.approx(0.3)
    sc3 = PumScenario(np.tile([1.0, 2.0, 3.0], (2, 1, 1)), [1.0], GUMBEL)
    assert indirect_utility(sc3, 0, 1, [0, 0, 0]) == 3.0
    with pytest.raises(InvalidCovariate):
        indirect_utility(sc3, 1, 0, [0, 0, 0])


def test_gumbel_mean_matches_logsumexp():
    sc = PumScenario(np.tile([0.0, 1.0], (2, 1, 1)), [1.0], GUMBEL)
    m = indirect_utility_draws(sc, 0, 0, 1_000_000, seed=1)
    oracle = logsumexp_mean([0.0, 1.0])
    assert oracle == pytest.approx(1.8905, abs=1e-4)
    assert abs(m.mean() - oracle) < 0.01


def test_draw_tau_degenerate_and_null():
    sc = PumScenario(np.random.default_rng(0).normal(size=(2, 3, 2)), [0.2, 0.3, 0.5], POINT)
    td = draw_tau(sc, 50, seed=3)
    np.testing.assert_allclose(td.tau, td.group_means[td.group], rtol=0, atol=1e-12)
    u = np.random.default_rng(1).normal(size=(1, 3, 2))
    null = PumScenario(np.concatenate([u, u]), [0.2, 0.3, 0.5], GUMBEL)
    assert np.all(draw_tau(null, 200, seed=4).tau == 0.0)


@pytest.mark.parametrize("delta", [0.5, 2.0])
def test_group_mean_matches_logsumexp_difference(delta):
    u = np.array([[[0.0, 0.0]], [[0.0, delta]]])
    td = draw_tau(PumScenario(u, [1.0], GUMBEL), 1_000_000, seed=5)
    oracle = np.log((1 + np.exp(delta)) / 2)
    assert abs(td.group_means[0] - oracle) <= 3 * td.group_se[0]


def test_conditional_cate_sample():
    td = TauDraws(np.array([0, 1]), np.array([-1.0, 3.0]), np.array([-1.0, 3.0]), np.zeros(2), np.array([0.5, 0.5]), 1)
    s = conditional_cate_sample(td, [0.5, 0.5])
    assert s.values.tolist() == [-1.0, 3.0] and s.weights.tolist() == [0.5, 0.5]
    with pytest.raises(GroupMismatch):
        conditional_cate_sample(td, [1.0])
    one = TauDraws(np.zeros(3, int), np.array([1.0, 2.0, 3.0]), np.array([2.0]), np.zeros(1), np.array([1.0]), 3)
    assert conditional_cate_sample(one, [1.0]).values.tolist() == [2.0]


def test_iterated_expectations_exact():
    sc = two_group_gumbel()
    td = draw_tau(sc, 5000, seed=6)
    assert np.dot(td.weights, td.tau) == pytest.approx(np.dot(sc.probs, td.group_means), abs=1e-12)


def test_upper_bound_degenerate_and_full_level():
    sc = PumScenario(np.random.default_rng(2).normal(size=(2, 3, 3)), [0.3, 0.3, 0.4], POINT)
    rep = check_theorem1(sc, 100, BETAS, seed=1)
    assert all(abs(r.slack) <= 1e-10 for r in rep.records)
    rep = check_theorem1(two_group_gumbel(), 5000, [1.0], seed=1)
    assert abs(rep.records[0].slack) <= 1e-10


def test_upper_bound_strict_at_low_level():
    rep = check_theorem1(two_group_gumbel(), 20000, [0.2], seed=2)
    r = rep.records[0]
    assert r.slack > 3 * r.mc_standard_error > 0


def test_upper_bound_battery():
    rng = np.random.default_rng(123)
    for i in range(50):
        rep = check_theorem1(random_pum(rng), 2000, BETAS, seed=i)
        assert not rep.any_violated, rep.to_json()


def test_lower_bound_examples():
    sc = PumScenario(np.random.default_rng(2).normal(size=(2, 2, 3)), [0.5, 0.5], POINT)
    rep = check_theorem2(sc, 0.0, 100, BETAS, seed=0)
    assert all(abs(r.slack) <= 1e-10 for r in rep.records)
    rep = check_theorem2(two_group_gumbel(), 1e6, 1000, [0.2], seed=0)
    r = rep.records[0]
    assert r.slack == pytest.approx(1e6 - (r.rhs + 1e6 - r.lhs))


def test_lower_bound_bounded_battery():
    rng = np.random.default_rng(321)
    for i in range(20):
        sc, gamma = random_bounded_pum(rng)
        assert not check_theorem2(sc, gamma, 2000, BETAS, seed=i).any_violated


def test_lower_bound_twice_the_half_width_can_be_too_small():
    # tau = max(e1, e3) - e2 has mean b/3 but can fall to -2b, so the gap reaches 7b/3
    b = 1.0
    u = np.array([[[-10.0, 0.0, -10.0]], [[0.0, -10.0, 0.0]]])
    sc = PumScenario(u, [1.0], NoiseSpec("uniform", low=-b, high=b))
    with pytest.raises(InvalidSlackBound):
        check_theorem2(sc, 2 * b, 10000, [0.2], seed=0)
    assert not check_theorem2(sc, 4 * b, 10000, [0.2], seed=0).any_violated


def test_lower_bound_understated_gamma_raises():
    with pytest.raises(InvalidSlackBound):
        check_theorem2(two_group_gumbel(), 0.1, 1000, [0.5], seed=0)


def test_w_beta_examples():
    sc = PumScenario(np.tile([0.0, 1.0], (2, 1, 1)), [1.0], GUMBEL)
    m = indirect_utility_draws(sc, 0, 0, 20000, seed=8)
    assert w_beta(sc, 0, 0, 1.0, 20000, seed=8) == pytest.approx(m.mean(), abs=1e-12)
    wb = w_beta(sc, 0, 0, 0.5, 20000, seed=8)
    assert m.mean() - m.std() / np.sqrt(0.5) < wb < logsumexp_mean([0, 1])
    det = PumScenario(np.tile([0.3, 1.7], (2, 1, 1)), [1.0], POINT)
    for b in (0.1, 0.5, 1.0):
        assert w_beta(det, 0, 1, b, 10, seed=0) == pytest.approx(1.7)
    with pytest.raises(InvalidCovariate):
        w_beta(sc, 3, 0, 0.5, 10, seed=0)


def test_w_beta_properties():
    sc = two_group_gumbel()
    rep = check_appendix_properties(sc, 0, 1, 0, np.linspace(0.1, 1.0, 10), 20000, seed=3)
    assert not rep.any_violated
    same = check_appendix_properties(sc, 1, 1, 1, [0.2, 0.5], 1000, seed=3)
    assert all(r.lhs == 0 and r.rhs == 0 for r in same.by_bound("w_beta_lipschitz"))
    det = PumScenario(np.random.default_rng(1).normal(size=(2, 2, 2)), [0.5, 0.5], POINT)
    rep = check_appendix_properties(det, 0, 1, 0, [0.2, 1.0], 100, seed=0)
    for r in rep.by_bound("w_beta_upper") + rep.by_bound("w_beta_lower"):
        assert abs(r.slack) <= 1e-12


def test_determinism_across_workers():
    sc = random_pum(np.random.default_rng(4))
    a = check_theorem1(sc, 3000, BETAS, seed=77, workers=1).to_json()
    b = check_theorem1(sc, 3000, BETAS, seed=77, workers=4).to_json()
    assert a == b


def test_scenario_validation_and_round_trip():
    with pytest.raises(BadConfig):
        PumScenario(np.zeros((2, 2, 2)), [0.5, 0.6], GUMBEL)
    with pytest.raises(BadConfig):
        PumScenario(np.zeros((3, 2, 2)), [0.5, 0.5], GUMBEL)
    sc = two_group_gumbel()
    again = PumScenario.from_dict(sc.to_dict())
    assert np.array_equal(again.utilities, sc.utilities) and again.noise == sc.noise


def test_bounds_from_external_draws_match_simulation_path():
    sc = two_group_gumbel()
    td = draw_tau(sc, 4000, seed=9)
    ext = check_bounds_from_draws(td.group, td.tau, td.weights, [0.2, 0.5, 1.0])
    sim = check_theorem1(sc, 4000, [0.2, 0.5, 1.0], seed=9, draws=td)
    for a, b in zip(ext.records, sim.records):
        assert a.lhs == pytest.approx(b.lhs, abs=1e-12) and a.rhs == pytest.approx(b.rhs, abs=1e-12)
