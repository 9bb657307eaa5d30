"""Benchmark problems with analytic or simulated ground truth.

Two problems ship:

* synthetic2d: cones on the unit square.  Reward peaks at a*, the
  single constraint is positive inside a disk that contains both the
  seed and a*, and the true Lipschitz constant of both outputs is
  exactly 1.

* lqr: tuning the cost-weight exponents of an LQR controller for a
  discrete-time double integrator.  The gain is synthesized on the
  design model; the simulated plant carries a deliberate input-gain
  mismatch.  Reward is negative normalized quadratic cost on the true
  plant; the constraint keeps the true trajectory inside a tube around
  the trajectory the design model predicts.  Deviation is saturated
  well above the tube radius so the constraint stays Lipschitz-benign
  in the deeply infeasible corner; the sign of the constraint is
  unaffected.  Both outputs are rescaled by precomputed factors chosen
  so the declared L = 1.75 is exactly 1.5x the dense-grid max slope.

Noise is i.i.d. Gaussian of scale sigma per output, the simplest
sigma-sub-Gaussian family.  evaluate is a pure function of (point,
seed); the ground-truth oracle is for the test harness and the trace
annotator, never the learner.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import solve_discrete_are

from . import rng
from .safe_learn import DomainGrid, make_grid

# -- synthetic2d constants
_SYN_OPT = np.array([0.6, 0.6])       # a*, reward peak
_SYN_CENTER = np.array([0.45, 0.45])  # safe-disk center
_SYN_RADIUS = 0.35
_SYN_SEED = (0.32, 0.32)

# -- lqr constants
_DT = 0.05
_T = 200
_A = np.array([[1.0, _DT], [0.0, 1.0]])
_B = np.array([[0.5 * _DT * _DT], [_DT]])
_B_TRUE = 1.4 * _B                    # input-gain mismatch
_X0 = np.array([1.0, 0.0])
_RHO = 0.1
_MARGIN = 0.26                        # tube radius on the raw deviation
_DEV_CAP = 0.36                       # saturation, strictly above the margin
# output scales: grid max slope * scale = 1.75 / 1.5 for each output
_LQR_SCALE_G = 5.364874782590662
_LQR_SCALE_F = 3.482823461601101
_LQR_SEED = (-1.2, 1.2)

_lqr_cache: dict = {}


@dataclass(frozen=True)
class ProblemSpec:
    """A benchmark problem: grid, noise, constraints, truth oracle."""

    name: str
    grid: DomainGrid
    sigma: float
    n_constraints: int
    lipschitz: float
    truth_fn: Callable[[np.ndarray], np.ndarray]
    has_ground_truth: bool = True


def _synthetic_truth(points: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(points)
    f = 1.0 - np.linalg.norm(pts - _SYN_OPT, axis=1)
    g = _SYN_RADIUS - np.linalg.norm(pts - _SYN_CENTER, axis=1)
    return np.stack([f, g], axis=1)


def _lqr_rollout(qw: float, rw: float):
    """Noise-free closed-loop rollout; returns (J, maxdev)."""
    Q = 10.0 ** qw * np.eye(2)
    R = np.array([[10.0 ** rw]])
    P = solve_discrete_are(_A, _B, Q, R)
    K = np.linalg.solve(R + _B.T @ P @ _B, _B.T @ P @ _A)
    k = K[0]
    xt = _X0.copy()
    xd = _X0.copy()
    bt = _B_TRUE[:, 0]
    bd = _B[:, 0]
    cost = 0.0
    maxdev = 0.0
    for _ in range(_T):
        ut = -float(k @ xt)
        ud = -float(k @ xd)
        cost += float(xt @ xt) + _RHO * ut * ut
        xt = _A @ xt + bt * ut
        xd = _A @ xd + bd * ud
        dev = float(np.linalg.norm(xt - xd))
        if dev > maxdev:
            maxdev = dev
    return cost / _T, maxdev


def _lqr_truth(points: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(points)
    out = np.empty((pts.shape[0], 2))
    for k, p in enumerate(pts):
        key = p.tobytes()
        hit = _lqr_cache.get(key)
        if hit is None:
            hit = _lqr_rollout(p[0], p[1])
            _lqr_cache[key] = hit
        J, dev = hit
        out[k, 0] = -J * _LQR_SCALE_F
        out[k, 1] = (_MARGIN - min(dev, _DEV_CAP)) * _LQR_SCALE_G
    return out


def make_synthetic_2d(sigma: float = 0.01) -> ProblemSpec:
    """Cone reward/constraint problem on [0,1]^2, 51x51 grid, L = 1."""
    grid = make_grid(((0.0, 1.0), (0.0, 1.0)), (51, 51), [_SYN_SEED])
    return ProblemSpec(
        name="synthetic2d", grid=grid, sigma=float(sigma), n_constraints=1,
        lipschitz=1.0, truth_fn=_synthetic_truth,
    )


def make_lqr_problem(sigma: float = 0.01) -> ProblemSpec:
    """LQR weight-exponent tuning on [-2,2]^2, 41x41 grid, L = 1.75.

    The double integrator is controllable, so every weight pair on the
    grid admits a Riccati solution; no grid points need excluding.
    """
    grid = make_grid(((-2.0, 2.0), (-2.0, 2.0)), (41, 41), [_LQR_SEED])
    return ProblemSpec(
        name="lqr", grid=grid, sigma=float(sigma), n_constraints=1,
        lipschitz=1.75, truth_fn=_lqr_truth,
    )


_FACTORIES = {"synthetic2d": make_synthetic_2d, "lqr": make_lqr_problem}


def make_problem(name: str, sigma: float = 0.01) -> ProblemSpec:
    if name not in _FACTORIES:
        raise ValueError(f"unknown problem {name!r}")
    return _FACTORIES[name](sigma=sigma)


def _grid_index(problem: ProblemSpec, point) -> int:
    pts = problem.grid.points
    d = np.linalg.norm(pts - np.asarray(point, dtype=float), axis=1)
    k = int(np.argmin(d))
    if d[k] > 1e-9:
        raise ValueError(f"point {point} is not on the problem grid")
    return k


def evaluate(problem: ProblemSpec, point, seed: int) -> np.ndarray:
    """Noisy measurement vector [f, g_1, ..., g_q] at a grid point.

    Pure function of (point, seed): the same seed always reproduces
    the same noise draw.
    """
    k = _grid_index(problem, point)
    truth = problem.truth_fn(problem.grid.points[k][None, :])[0]
    gen = rng.stream(seed, "eval")
    return truth + problem.sigma * gen.standard_normal(truth.size)


def true_values(problem: ProblemSpec, point) -> np.ndarray:
    """Noise-free [f, g_1, ..., g_q]; harness/annotator use only."""
    k = _grid_index(problem, point)
    return problem.truth_fn(problem.grid.points[k][None, :])[0]


def true_table(problem: ProblemSpec) -> np.ndarray:
    """Ground truth over the full grid, shape (P, q+1)."""
    return problem.truth_fn(problem.grid.points)


def grid_safe_optimum(problem: ProblemSpec):
    """(index, reward) of the best grid point with all true g_i >= 0."""
    tab = true_table(problem)
    safe = np.all(tab[:, 1:] >= 0, axis=1)
    if not safe.any():
        raise ValueError("no safe grid points")
    idx = np.nonzero(safe)[0]
    k = int(idx[np.argmax(tab[idx, 0])])
    return k, float(tab[k, 0])
