import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sqwelfare.empirical import cdf, make_sample, mean, quantile, std, variance
from sqwelfare.errors import EmptySample, InvalidLevel, LengthMismatch, NonFiniteValue, NonPositiveWeight

from oracles import two_pass_moments

FIVE = [10, 20, 30, 40, 50]


def test_make_sample_sorts_and_normalizes():
    s = make_sample([3, 1, 2])
    assert s.values.tolist() == [1, 2, 3]
    np.testing.assert_allclose(s.weights, [1 / 3] * 3)
    s = make_sample([5], [7])
    assert s.values.tolist() == [5] and s.weights.tolist() == [1.0]


def test_ties_are_preserved():
    s = make_sample([1, 1, 2], [1, 1, 2])
    assert s.values.tolist() == [1, 1, 2]
    np.testing.assert_allclose(s.weights, [0.25, 0.25, 0.5])
    assert abs(s.cumweights[-1] - 1.0) < 1e-12


def test_sample_is_read_only():
    s = make_sample([1.0, 2.0])
    with pytest.raises(ValueError):
        s.values[0] = 5.0


@pytest.mark.parametrize(
    "values, weights, exc",
    [
        ([], None, EmptySample),
        ([1.0, np.nan], None, NonFiniteValue),
        ([1.0, np.inf], None, NonFiniteValue),
        ([1.0, 2.0], [1.0, 0.0], NonPositiveWeight),
        ([1.0, 2.0], [1.0, -1.0], NonPositiveWeight),
        ([1.0, 2.0], [1.0], LengthMismatch),
    ],
)
def test_make_sample_rejects(values, weights, exc):
    with pytest.raises(exc):
        make_sample(values, weights)


def test_cdf_examples():
    s = make_sample([10, 20, 30])
    assert cdf(s, 20) == pytest.approx(2 / 3)
    assert cdf(s, 9) == 0.0
    assert cdf(make_sample([1, 1, 2], [0.25, 0.25, 0.5]), 1) == pytest.approx(0.5)
    with pytest.raises(NonFiniteValue):
        cdf(s, np.nan)


def test_quantile_examples():
    s = make_sample(FIVE)
    assert quantile(s, 0.4) == 20
    assert quantile(s, 0.41) == 30
    assert quantile(s, 1.0) == 50
    with pytest.raises(InvalidLevel):
        quantile(s, 0.0)
    with pytest.raises(InvalidLevel):
        quantile(s, 1.5)


def test_moments_examples():
    s = make_sample([10, 20, 30])
    assert mean(s) == pytest.approx(20)
    assert variance(s) == pytest.approx(200 / 3)
    assert variance(make_sample([5])) == 0.0


def test_moments_match_two_pass_reference():
    rng = np.random.default_rng(7)
    v = rng.lognormal(size=100_000)
    m, var = two_pass_moments(v)
    s = make_sample(v)
    assert abs(mean(s) - m) <= 1e-12 * abs(m)
    assert abs(variance(s) - var) <= 1e-12 * var
    assert std(s) == pytest.approx(np.sqrt(var), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=40),
    st.lists(st.floats(0.01, 10.0), min_size=40, max_size=40),
)
def test_quantile_monotone_and_generalized_inverse(values, weights):
    s = make_sample(values, weights[: len(values)])
    grid = np.linspace(0.01, 1.0, 50)
    q = [quantile(s, b) for b in grid]
    assert all(a <= b for a, b in zip(q, q[1:]))
    for b, qb in zip(grid, q):
        assert cdf(s, qb) >= b - 1e-12
