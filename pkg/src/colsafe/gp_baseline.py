"""Dense Gaussian-process SafeOpt baseline.

A deliberately naive baseline: every refit builds and factorizes the
full n x n Matern-3/2 kernel matrix (cubic cost), and every iteration
re-predicts the entire grid.  No sparse approximations, no inducing
points; the point is to exhibit the cubic trend the timing comparison
measures.  One factorization is shared across all q+1 outputs since
they use the same inputs and kernel.

Confidence intervals are posterior mean +- b * std with a fixed scale
b.  The prior (no data) interval is mean 0 +- b * signal_std, which
assumes outputs are roughly centered within a few signal standard
deviations; both knobs are config-exposed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.spatial.distance import cdist

from .nw_estimator import Observation

_SQRT3 = np.sqrt(3.0)


@dataclass
class GpModel:
    """Matern-3/2 GP with homoscedastic noise and cached factorization."""

    length_scale: float
    signal_std: float
    noise_std: float
    X: Optional[np.ndarray] = None
    Y: Optional[np.ndarray] = None
    chol: Optional[tuple] = None
    alpha: Optional[np.ndarray] = None
    jitter_used: float = 0.0

    @property
    def n(self) -> int:
        return 0 if self.X is None else self.X.shape[0]


def _matern32(model: GpModel, D: np.ndarray) -> np.ndarray:
    s = _SQRT3 * D / model.length_scale
    return model.signal_std ** 2 * (1.0 + s) * np.exp(-s)


def gp_fit(model: GpModel, observations: List[Observation]) -> GpModel:
    """Refit from scratch on the full observation list.

    Cholesky failures retry with growing jitter up to 1e-6, then raise.
    """
    if not observations:
        model.X = None
        model.Y = None
        model.chol = None
        model.alpha = None
        return model
    X = np.stack([o.point for o in observations])
    Y = np.stack([o.values for o in observations])
    K = _matern32(model, cdist(X, X))
    K[np.diag_indices_from(K)] += model.noise_std ** 2
    jitter = 0.0
    while True:
        try:
            model.chol = cho_factor(K if jitter == 0.0
                                    else K + jitter * np.eye(K.shape[0]),
                                    lower=True)
            break
        except np.linalg.LinAlgError:
            jitter = 1e-10 if jitter == 0.0 else jitter * 10.0
            if jitter > 1e-6:
                raise
    model.jitter_used = jitter
    model.X = X
    model.Y = Y
    model.alpha = cho_solve(model.chol, Y)
    return model


def gp_predict(model: GpModel, queries: np.ndarray):
    """Posterior mean (m, p) and standard deviation (m,) at queries."""
    Q = np.atleast_2d(np.asarray(queries, dtype=float))
    prior_var = model.signal_std ** 2
    if model.n == 0:
        p = 1
        return np.zeros((Q.shape[0], p)), np.full(Q.shape[0],
                                                  np.sqrt(prior_var))
    Ks = _matern32(model, cdist(model.X, Q))            # (n, m)
    mean = Ks.T @ model.alpha                           # (m, p)
    V = solve_triangular(model.chol[0], Ks, lower=True)
    var = prior_var - np.einsum("ij,ij->j", V, V)
    std = np.sqrt(np.clip(var, 0.0, None))
    return mean, std


def gp_interval(model: GpModel, a, scale: float):
    """[mean - b*std, mean + b*std] per output at a single point."""
    mean, std = gp_predict(model, np.asarray(a, dtype=float)[None, :])
    return mean[0] - scale * std[0], mean[0] + scale * std[0]


class GpIntervalModel:
    """Loop adapter: refits lazily, reports every grid point dirty."""

    def __init__(self, grid, n_outputs: int, length_scale: float,
                 signal_std: float, noise_std: float,
                 interval_scale: float = 2.0):
        self.model = GpModel(length_scale=length_scale,
                             signal_std=signal_std, noise_std=noise_std)
        self.interval_scale = float(interval_scale)
        self.observations: List[Observation] = []
        self._n_points = grid.n_points
        self._n_outputs = int(n_outputs)
        self._stale = True

    def ingest(self, obs: Observation) -> None:
        self.observations.append(obs)
        self._stale = True

    def take_dirty(self) -> np.ndarray:
        return np.arange(self._n_points)

    def intervals(self, points: np.ndarray):
        if self._stale:
            gp_fit(self.model, self.observations)
            self._stale = False
        if self.model.n == 0:
            p = self._n_outputs
            half = self.interval_scale * self.model.signal_std
            m = np.atleast_2d(points).shape[0]
            return np.full((m, p), -half), np.full((m, p), half)
        mean, std = gp_predict(self.model, points)
        half = self.interval_scale * std[:, None]
        return mean - half, mean + half


def run_safeopt_baseline(problem, budget: int, seed: int,
                         length_scale: float = 0.1, signal_std: float = 1.0,
                         noise_std: float = 0.01, interval_scale: float = 2.0,
                         **run_kwargs):
    """Run the shared loop with GP intervals in place of mu +- beta."""
    from .safe_learn import run

    model = GpIntervalModel(problem.grid, problem.n_constraints + 1,
                            length_scale=length_scale, signal_std=signal_std,
                            noise_std=noise_std,
                            interval_scale=interval_scale)
    return run(problem, model, budget, seed, **run_kwargs)
