"""Incremental Nadaraya-Watson estimation with error bounds.

The estimator keeps an append-only log of observations and answers,
for any query point a', the kernel-weighted mean

    mu_n(a', i) = sum_t K_lam(a', a_t) * h_t(a_t, i) / kappa_n(a'),
    kappa_n(a') = sum_t K_lam(a', a_t),

together with the high-probability half-width

    beta_n(a') = L * lam + 2 * sigma * alpha_n(a') / kappa_n(a'),

where alpha_n depends on kappa_n and the confidence level delta.  The
bound does not depend on the output index i.  When no observation lies
within the bandwidth (kappa = 0) the estimator reports NO_DATA and an
infinite beta; downstream confidence intervals then stay at their
prior value.

Queries are accelerated by a kd-tree over the observation points.  The
tree is static and rebuilt on a doubling schedule: observations that
arrive after the last rebuild sit in a linear-scan buffer until the
total count reaches twice the indexed count.  All terms excluded by
the radius search carry exactly zero kernel weight, so indexed results
equal a naive scan over every observation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .kernel import KernelSpec, pair_weights

NO_DATA = None

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Observation:
    """One measurement vector taken at a parameter point.

    values holds the noisy measurements ordered by selector index:
    values[0] is the reward sample, values[1:] the constraint samples.
    """

    point: np.ndarray
    values: np.ndarray
    iteration: int

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.point.ndim != 1:
            raise ValueError("observation point must be a 1-d vector")
        if self.values.ndim != 1 or self.values.size < 1:
            raise ValueError("observation values must be a nonempty 1-d vector")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("observation values must be finite")
        if self.iteration < 1:
            raise ValueError("iteration must be a positive integer")


@dataclass(frozen=True)
class EstimateResult:
    """mu/kappa/alpha/beta at a single query point.

    Invariant: kappa == 0  iff  mu is NO_DATA  iff  beta == +inf.
    """

    mu: Optional[float]
    kappa: float
    alpha: float
    beta: float


class EstimatorState:
    """Observation log + spatial index + bound configuration.

    Parameters
    ----------
    kernel : KernelSpec
    sigma : float
        Sub-Gaussian noise scale of the measurements.
    delta : float
        Confidence level in (0, 1) used by alpha/beta.
    lipschitz : float
        Known Lipschitz constant L of every output.

    Single-writer, multi-reader: ingest needs exclusive access, all
    query methods are pure reads.
    """

    def __init__(self, kernel: KernelSpec, sigma: float, delta: float,
                 lipschitz: float):
        if not sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0 < delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not lipschitz > 0:
            raise ValueError("lipschitz must be positive")
        self.kernel = kernel
        self.sigma = float(sigma)
        self.delta = float(delta)
        self.lipschitz = float(lipschitz)
        self._dim: Optional[int] = None
        self._n_outputs: Optional[int] = None
        self._points: Optional[np.ndarray] = None   # capacity-doubled storage
        self._values: Optional[np.ndarray] = None
        self._n = 0
        self._tree: Optional[cKDTree] = None
        self._indexed = 0                            # points covered by the tree

    # -- log bookkeeping ------------------------------------------------

    def __len__(self) -> int:
        return self._n

    @property
    def n_outputs(self) -> Optional[int]:
        return self._n_outputs

    @property
    def points(self) -> np.ndarray:
        """View of the n ingested points, in ingestion order."""
        if self._n == 0:
            return np.empty((0, self._dim or 0))
        return self._points[: self._n]

    @property
    def values(self) -> np.ndarray:
        if self._n == 0:
            return np.empty((0, self._n_outputs or 0))
        return self._values[: self._n]

    @property
    def observations(self) -> list:
        """The log as Observation objects (test/diagnostic convenience)."""
        return [
            Observation(self._points[t].copy(), self._values[t].copy(), t + 1)
            for t in range(self._n)
        ]

    def ingest(self, obs: Observation) -> None:
        """Append one observation and keep the index consistent."""
        if self._dim is None:
            self._dim = obs.point.size
            self._n_outputs = obs.values.size
            cap = 16
            self._points = np.empty((cap, self._dim))
            self._values = np.empty((cap, self._n_outputs))
        if obs.point.size != self._dim:
            raise ValueError(
                f"point dimension {obs.point.size} != state dimension {self._dim}")
        if obs.values.size != self._n_outputs:
            raise ValueError(
                f"values length {obs.values.size} != expected {self._n_outputs}")
        if self._n == self._points.shape[0]:
            self._points = np.concatenate([self._points, np.empty_like(self._points)])
            self._values = np.concatenate([self._values, np.empty_like(self._values)])
        self._points[self._n] = obs.point
        self._values[self._n] = obs.values
        self._n += 1
        if self._n >= 2 * max(self._indexed, 1):
            self._tree = cKDTree(self._points[: self._n].copy())
            self._indexed = self._n

    # -- neighbor queries -----------------------------------------------

    def _check_query(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        if self._dim is not None and a.shape != (self._dim,):
            raise ValueError(f"query shape {a.shape} != ({self._dim},)")
        return a

    def radius_neighbors(self, a) -> np.ndarray:
        """Indices t (0-based, ascending) with ||a - a_t|| <= bandwidth."""
        a = self._check_query(a)
        if self._n == 0:
            return np.empty(0, dtype=np.intp)
        lam = self.kernel.bandwidth
        hits = []
        if self._indexed > 0:
            hits.append(np.asarray(self._tree.query_ball_point(a, lam),
                                   dtype=np.intp))
        if self._n > self._indexed:
            buf = self._points[self._indexed: self._n]
            d = np.linalg.norm(buf - a, axis=1)
            hits.append(self._indexed + np.nonzero(d <= lam)[0])
        idx = np.concatenate(hits) if hits else np.empty(0, dtype=np.intp)
        idx.sort()
        return idx

    # -- batched estimate (the workhorse) -------------------------------

    def query_batch(self, queries: np.ndarray):
        """mu/kappa/alpha/beta at many query points.

        Returns (mu, kappa, alpha, beta) where mu has shape
        (m, n_outputs) with NaN rows wherever kappa is zero, and the
        rest have shape (m,).  beta is +inf wherever kappa is zero.
        """
        Q = np.atleast_2d(np.asarray(queries, dtype=float))
        m = Q.shape[0]
        p = self._n_outputs or 1
        num = np.zeros((m, p))
        kap = np.zeros(m)
        lam = self.kernel.bandwidth
        if self._n > 0:
            if self._indexed > 0:
                lists = self._tree.query_ball_point(Q, lam)
                counts = np.fromiter((len(l) for l in lists), dtype=np.intp,
                                     count=m)
                if counts.sum() > 0:
                    cat = np.concatenate(
                        [np.asarray(l, dtype=np.intp) for l in lists])
                    rep = np.repeat(np.arange(m), counts)
                    d = np.linalg.norm(self._points[cat] - Q[rep], axis=1)
                    w = pair_weights(self.kernel, d)
                    kap += np.bincount(rep, weights=w, minlength=m)
                    for i in range(p):
                        num[:, i] += np.bincount(
                            rep, weights=w * self._values[cat, i], minlength=m)
            if self._n > self._indexed:
                buf = self._points[self._indexed: self._n]
                W = pair_weights(self.kernel, cdist(Q, buf))
                kap += W.sum(axis=1)
                num += W @ self._values[self._indexed: self._n]
        alpha = self._alpha_from_kappa(kap)
        with np.errstate(divide="ignore", invalid="ignore"):
            mu = np.where(kap[:, None] > 0, num / kap[:, None], np.nan)
            beta = np.where(
                kap > 0,
                self.lipschitz * lam + 2.0 * self.sigma * alpha / kap,
                np.inf,
            )
        return mu, kap, alpha, beta

    def _alpha_from_kappa(self, kap: np.ndarray) -> np.ndarray:
        # Both branches agree at kappa = 1: sqrt(1 * log(sqrt(2)/delta)).
        kap = np.asarray(kap, dtype=float)
        low = math.sqrt(math.log(_SQRT2 / self.delta))
        safe_kap = np.maximum(kap, 1.0)
        high = np.sqrt(safe_kap * np.log(np.sqrt(1.0 + safe_kap) / self.delta))
        return np.where(kap <= 1.0, low, high)

    # -- scalar operations ----------------------------------------------

    def kappa(self, a) -> float:
        a = self._check_query(a)
        _, kap, _, _ = self.query_batch(a[None, :])
        return float(kap[0])

    def mu(self, a, i: int) -> Optional[float]:
        a = self._check_query(a)
        if self._n_outputs is not None and not 0 <= i < self._n_outputs:
            raise ValueError(f"selector index {i} out of range")
        mu, kap, _, _ = self.query_batch(a[None, :])
        if kap[0] == 0.0:
            return NO_DATA
        return float(mu[0, i])

    def alpha(self, a) -> float:
        a = self._check_query(a)
        _, _, alph, _ = self.query_batch(a[None, :])
        return float(alph[0])

    def beta(self, a) -> float:
        a = self._check_query(a)
        _, _, _, bet = self.query_batch(a[None, :])
        return float(bet[0])

    def estimate(self, a, i: int = 0) -> EstimateResult:
        a = self._check_query(a)
        if self._n_outputs is not None and not 0 <= i < self._n_outputs:
            raise ValueError(f"selector index {i} out of range")
        mu, kap, alph, bet = self.query_batch(a[None, :])
        k = float(kap[0])
        return EstimateResult(
            mu=NO_DATA if k == 0.0 else float(mu[0, i]),
            kappa=k,
            alpha=float(alph[0]),
            beta=float(bet[0]),
        )
