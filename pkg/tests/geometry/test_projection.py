import numpy as np
import pytest
from sococast.core.generator import make_rng
from sococast.geometry.projection import (
    a_norm_objective,
    a_norm_project,
    power_iteration,
    project_l1_ball,
    project_positive_l1,
    project_simplex,
)
from sococast.geometry.sets import L1Ball, PositiveL1, Product, Simplex
from sococast.utils.exceptions import ContractError, NumericError


def random_spd(rng, d):
    M = rng.standard_normal((d, d))
    return M @ M.T + 0.1 * np.eye(d)


def test_project_simplex():
    w = project_simplex(np.array([0.9, 0.3, -0.5]))
    assert np.allclose(w, [0.8, 0.2, 0.0])
    assert w.sum() == pytest.approx(1.0, abs=1e-15)
    # ties keep the symmetry
    assert np.allclose(project_simplex(np.array([2.0, 2.0])), [0.5, 0.5])
    assert np.allclose(project_simplex(np.array([1.0, 1.0, 1.0]), s=3.0), [1.0, 1.0, 1.0])


def test_project_l1_ball():
    v = np.array([0.1, -0.2])
    w = project_l1_ball(v, 1.0)
    assert np.array_equal(w, v)
    assert w is not v
    assert np.allclose(project_l1_ball(np.array([1.5, -0.5]), 1.0), [1.0, 0.0])
    assert np.abs(project_l1_ball(np.array([3.0, -4.0, 1.0]), 2.0)).sum() == pytest.approx(2.0)


def test_project_positive_l1():
    assert np.allclose(project_positive_l1(np.array([-1.0, 0.1]), 0.25), [0.0, 0.1])
    assert np.allclose(project_positive_l1(np.array([1.0, 1.0]), 0.25), [0.125, 0.125])


def test_power_iteration():
    A = np.diag([1.0, 4.0, 2.0])
    assert power_iteration(A) == pytest.approx(4.0, rel=1e-6)
    assert power_iteration(np.zeros((2, 2))) == 0.0


def test_a_norm_project_examples():
    ball = L1Ball(n=2)
    y = np.array([0.3, -0.2])
    assert np.array_equal(a_norm_project(ball, y, np.diag([1.0, 4.0])), y)

    x = a_norm_project(Simplex(n=2), np.array([2.0, -1.0]), np.eye(2))
    assert np.allclose(x, [1.0, 0.0], atol=1e-9)


def test_a_norm_project_grid():
    ball = L1Ball(n=2)
    y, A = np.array([1.5, 0.5]), np.diag([1.0, 4.0])
    x = a_norm_project(ball, y, A)

    grid = np.linspace(-1.0, 1.0, 401)
    g1, g2 = np.meshgrid(grid, grid, indexing="ij")
    points = np.stack([g1.ravel(), g2.ravel()], axis=1)
    points = points[np.abs(points).sum(axis=1) <= 1.0 + 1e-12]
    diff = points - y
    values = 0.5 * np.einsum("ni,ij,nj->n", diff, A, diff)
    best = points[np.argmin(values)]
    assert np.all(np.abs(x - best) <= 1e-3 + 1e-12)
    assert ball.contains(x)


@pytest.mark.parametrize(
    "feasible_set",
    [L1Ball(n=4), Simplex(n=5), Product(parts=[L1Ball(n=2), PositiveL1(radius=0.25, n=2)])],
    ids=lambda s: s.kind,
)
def test_a_norm_project_properties(feasible_set):
    rng = make_rng(5)
    d = feasible_set.dim
    for _ in range(10):
        y = 2.0 * rng.standard_normal(d)
        x = a_norm_project(feasible_set, y, np.eye(d))
        assert np.allclose(x, feasible_set.project(y), atol=1e-8)

        A = random_spd(rng, d)
        x = a_norm_project(feasible_set, y, A)
        assert feasible_set.contains(x)
        candidates = feasible_set.sample(rng, 1000, vertex_prob=0.5)
        diff = candidates - y
        values = 0.5 * np.einsum("ni,ij,nj->n", diff, A, diff)
        objective = a_norm_objective(x, y, A)
        assert np.all(objective <= values + 1e-8 * max(1.0, abs(objective)))


def test_a_norm_project_error():
    ball = L1Ball(n=2)
    with pytest.raises(ContractError) as e:
        a_norm_project(ball, np.array([2.0, 0.0]), np.eye(3))
    assert "Var: A should have shape (2, 2), got: (3, 3)" in str(e)

    simplex = Simplex(n=3)
    A = np.diag([1.0, 10.0, 100.0])
    with pytest.raises(NumericError) as e:
        a_norm_project(simplex, np.array([2.0, -1.0, 0.5]), A, tol=0.0, max_iter=1)
    assert e.value.last_iterate is not None
    assert simplex.contains(e.value.last_iterate)
    assert e.value.residual > 0.0
    assert "did not converge after 1 iterations" in str(e)
