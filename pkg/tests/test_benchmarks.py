import numpy as np
import pytest
from scipy.spatial.distance import cdist

from colsafe import rng
from colsafe.benchmarks import (evaluate, grid_safe_optimum, make_lqr_problem,
                                make_problem, make_synthetic_2d, true_table,
                                true_values)


def pairwise_max_slope(problem, col):
    tab = true_table(problem)
    pts = problem.grid.points
    D = cdist(pts, pts)
    np.fill_diagonal(D, np.inf)
    dv = np.abs(tab[:, col][:, None] - tab[:, col][None, :])
    return float((dv / D).max())


def test_unknown_problem_name():
    with pytest.raises(ValueError):
        make_problem("pendulum")


def test_synthetic_shapes():
    p = make_synthetic_2d()
    assert p.grid.n_points == 51 * 51
    assert p.n_constraints == 1
    assert p.lipschitz == 1.0
    assert p.has_ground_truth


def test_synthetic_seed_safely_interior():
    p = make_synthetic_2d()
    seed_pt = p.grid.points[p.grid.safe_seed[0]]
    np.testing.assert_allclose(seed_pt, [0.32, 0.32])
    g = true_values(p, seed_pt)[1]
    assert g > 1e-3


def test_synthetic_truth_values():
    p = make_synthetic_2d()
    v = true_values(p, np.array([0.6, 0.6]))
    assert v[0] == pytest.approx(1.0)
    assert v[1] == pytest.approx(0.35 - np.hypot(0.15, 0.15))
    # far corner is unsafe
    assert true_values(p, np.array([1.0, 1.0]))[1] < 0


def test_synthetic_lipschitz_dominates_slopes():
    p = make_synthetic_2d()
    assert pairwise_max_slope(p, 0) <= p.lipschitz + 1e-9
    assert pairwise_max_slope(p, 1) <= p.lipschitz + 1e-9


def test_lqr_shapes():
    p = make_lqr_problem()
    assert p.grid.n_points == 41 * 41
    assert p.n_constraints == 1
    assert p.lipschitz == 1.75
    seed_pt = p.grid.points[p.grid.safe_seed[0]]
    np.testing.assert_allclose(seed_pt, [-1.2, 1.2])


def test_lqr_seed_safely_interior():
    p = make_lqr_problem()
    g = true_values(p, np.array([-1.2, 1.2]))[1]
    assert g > 1e-3
    # strictly above the kernel-bias floor so learning can start
    assert g > 0.5 * p.lipschitz


def test_lqr_frozen_values():
    p = make_lqr_problem()
    f_seed = true_values(p, np.array([-1.2, 1.2]))[0]
    assert f_seed == pytest.approx(-1.369853, abs=1e-4)
    idx, reward = grid_safe_optimum(p)
    np.testing.assert_allclose(p.grid.points[idx], [-0.1, -1.1])
    assert reward == pytest.approx(-0.429613, abs=1e-4)


def test_lqr_unsafe_region_exists():
    p = make_lqr_problem()
    tab = true_table(p)
    frac_unsafe = float((tab[:, 1] < 0).mean())
    assert 0.01 < frac_unsafe < 0.25


def test_lqr_lipschitz_dominates_slopes():
    p = make_lqr_problem()
    assert pairwise_max_slope(p, 0) <= p.lipschitz + 1e-9
    assert pairwise_max_slope(p, 1) <= p.lipschitz + 1e-9


def test_lqr_table_cached():
    p = make_lqr_problem()
    a = true_table(p)
    b = true_table(p)
    np.testing.assert_array_equal(a, b)


def test_evaluate_deterministic_per_seed():
    p = make_synthetic_2d(sigma=0.05)
    pt = p.grid.points[p.grid.safe_seed[0]]
    v1 = evaluate(p, pt, seed=123)
    v2 = evaluate(p, pt, seed=123)
    v3 = evaluate(p, pt, seed=124)
    np.testing.assert_array_equal(v1, v2)
    assert not np.array_equal(v1, v3)


def test_evaluate_rejects_off_grid():
    p = make_synthetic_2d()
    with pytest.raises(ValueError):
        evaluate(p, np.array([0.513, 0.5]), seed=0)


def test_evaluate_noise_statistics():
    p = make_synthetic_2d(sigma=0.1)
    pt = p.grid.points[0]
    truth = true_values(p, pt)
    draws = np.array([evaluate(p, pt, seed=rng.derived_seed(0, "mc", k))
                      for k in range(4000)])
    resid = draws - truth[None, :]
    assert abs(resid.mean()) < 0.01
    assert resid.std() == pytest.approx(0.1, abs=0.01)


def test_grid_safe_optimum_synthetic():
    p = make_synthetic_2d()
    idx, reward = grid_safe_optimum(p)
    np.testing.assert_allclose(p.grid.points[idx], [0.6, 0.6])
    assert reward == pytest.approx(1.0)
    # optimum point really is safe
    assert true_values(p, p.grid.points[idx])[1] >= 0
