import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import minimize

from aoed.errors import DimensionMismatch, InvalidBudget
from aoed.simplex import CappedSimplex


def grid_projection(v, budget, taus=np.linspace(0, 5, 500001)):
    """Projection by scanning the threshold on a dense grid."""
    sums = np.clip(v[None, :] - taus[:, None], 0, 1).sum(axis=1)
    tau = taus[np.argmin(np.abs(sums - budget))]
    return np.clip(v - tau, 0, 1), tau


def qp_projection(v, budget):
    """Projection as a generic constrained QP."""
    res = minimize(lambda x: 0.5 * np.sum((x - v) ** 2), np.full(v.size, budget / v.size / 2),
                   jac=lambda x: x - v, bounds=[(0, 1)] * v.size, method="SLSQP",
                   constraints=[{"type": "ineq", "fun": lambda x: budget - x.sum(),
                                 "jac": lambda x: -np.ones_like(x)}],
                   options={"ftol": 1e-14, "maxiter": 500})
    return res.x


@pytest.mark.parametrize("w, expected", [
    ((1, 1, 0), True),
    ((1, 1, 0.5), False),
    ((0.5, 0.5, 0.5), True),
    ((-0.1, 0.5, 0.5), False),
])
def test_contains(w, expected):
    assert CappedSimplex(3, 2).contains(w) is expected


def test_dimension_checks():
    s = CappedSimplex(3, 2)
    for f in (s.contains, s.project, s.linear_minimizer):
        with pytest.raises(DimensionMismatch):
            f(np.zeros(4))
    with pytest.raises(InvalidBudget):
        CappedSimplex(3, 4)
    with pytest.raises(InvalidBudget):
        CappedSimplex(3, 0)


def test_project_example_against_grid_oracle():
    v = np.array([2.0, 2.0, -1.0])
    p_grid, tau = grid_projection(v, 1)
    assert tau == pytest.approx(1.5, abs=1e-5)
    np.testing.assert_allclose(p_grid, [0.5, 0.5, 0], atol=1e-5)
    np.testing.assert_allclose(CappedSimplex(3, 1).project(v), [0.5, 0.5, 0], atol=1e-12)


def test_project_box_clip_only():
    np.testing.assert_array_equal(CappedSimplex(2, 2).project([1.7, -0.3]), [1.0, 0.0])


def test_project_keeps_feasible_points():
    w = np.array([0.2, 0.9, 0.4])
    np.testing.assert_array_equal(CappedSimplex(3, 2).project(w), w)


def test_project_matches_qp_oracle():
    rng = np.random.default_rng(0)
    for _ in range(30):
        m = int(rng.integers(2, 12))
        budget = int(rng.integers(1, m + 1))
        v = rng.normal(0.5, 1.5, m)
        np.testing.assert_allclose(CappedSimplex(m, budget).project(v), qp_projection(v, budget),
                                   atol=1e-6)


def test_budget_residual_at_rounding_level():
    rng = np.random.default_rng(1)
    for _ in range(200):
        v = rng.normal(0.3, 2.0, 30)
        p = CappedSimplex(30, 5).project(v)
        if np.clip(v, 0, 1).sum() > 5:
            assert abs(p.sum() - 5) < 1e-13


@pytest.mark.parametrize("g, budget, expected", [
    ((-3, -1, -2), 2, (1, 0, 1)),
    ((1, 2, 3), 2, (0, 0, 0)),
    ((-1, -1, -1, 0), 2, (1, 1, 0, 0)),
])
def test_linear_minimizer(g, budget, expected):
    np.testing.assert_array_equal(CappedSimplex(len(g), budget).linear_minimizer(g), expected)


def _feasible_points(rng, m, budget, count):
    u = rng.uniform(0, 1, (count, m))
    return u * np.minimum(1, budget / u.sum(axis=1))[:, None]


def test_linear_minimizer_beats_random_feasible_points():
    rng = np.random.default_rng(2)
    for _ in range(20):
        m = int(rng.integers(2, 20))
        budget = int(rng.integers(1, m + 1))
        g = rng.standard_normal(m)
        s = CappedSimplex(m, budget)
        best = g @ s.linear_minimizer(g)
        assert np.all(_feasible_points(rng, m, budget, 1000) @ g >= best - 1e-12)


@st.composite
def problems_(draw):
    m = draw(st.integers(1, 25))
    budget = draw(st.integers(1, m))
    floats = st.floats(-5, 5, allow_nan=False)
    u = np.array(draw(st.lists(floats, min_size=m, max_size=m)))
    v = np.array(draw(st.lists(floats, min_size=m, max_size=m)))
    return CappedSimplex(m, budget), u, v


@given(problems_())
def test_projection_properties(case):
    s, u, v = case
    pu, pv = s.project(u), s.project(v)
    assert s.contains(pu, tol=1e-9)
    np.testing.assert_allclose(s.project(pu), pu, atol=1e-10)
    assert np.linalg.norm(pu - pv) <= np.linalg.norm(u - v) + 1e-10
    z = _feasible_points(np.random.default_rng(0), s.m, s.budget, 100)
    assert np.all((z - pu) @ (u - pu) <= 1e-9)
