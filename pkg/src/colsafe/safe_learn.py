"""Safe-set machinery and the optimization loop.

Per iteration n the learner, holding data from iterations 1..n-1:

1. intersects fresh confidence intervals into the contained bounds
   [l, u] (update_bounds),
2. certifies new points safe by Lipschitz propagation of constraint
   lower bounds from the previous safe set (update_safe_set),
3. forms the maximizer set M_n (points whose reward upper bound could
   beat the best reward lower bound) and the expander set G_n (points
   whose optimistic constraint value could certify some unsafe point),
4. samples the point of largest interval width among M_n union G_n,
5. ingests the measurement.

The best guess is the safe point with the largest reward lower bound.

Bounds are extended reals: before any data l = -inf, u = +inf
everywhere except seed constraints, which start at [0, +inf).  All
selector indexing follows the measurement layout: output 0 is the
reward, outputs 1..q the constraints.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .kernel import pair_weights
from .nw_estimator import EstimatorState, Observation
from . import rng


class _Converged:
    """Sentinel returned by select_next when M_n and G_n are empty."""

    def __repr__(self):
        return "CONVERGED"


CONVERGED = _Converged()

# Above this many candidate/unsafe pairs compute_expanders switches from
# one dense distance matrix to a kd-tree prefilter (same predicate).
_EXPANDER_DENSE_LIMIT = 400_000


@dataclass(frozen=True)
class DomainGrid:
    """Finite ordered parameter set with safe-seed membership.

    points are row-major lattice points; ordering is fixed for the run
    lifetime because tie-breaking picks the smallest index.
    """

    points: np.ndarray                 # (P, d)
    safe_seed: np.ndarray              # sorted point indices, nonempty
    bounds: tuple                      # ((lo, hi), ...) per axis
    resolution: tuple                  # points per axis

    def __post_init__(self):
        if len(self.safe_seed) == 0:
            raise ValueError("safe seed must be nonempty")

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def make_grid(bounds, resolution, seed_points) -> DomainGrid:
    """Axis-aligned uniform lattice with the given safe seed points.

    bounds: ((lo, hi), ...) per axis; resolution: points per axis.
    seed_points must coincide with lattice points (1e-9 tolerance).
    """
    bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
    resolution = tuple(int(r) for r in resolution)
    axes = [np.linspace(lo, hi, r) for (lo, hi), r in zip(bounds, resolution)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    seed_idx = []
    for sp in np.atleast_2d(np.asarray(seed_points, dtype=float)):
        d = np.linalg.norm(points - sp, axis=1)
        k = int(np.argmin(d))
        if d[k] > 1e-9:
            raise ValueError(f"seed point {sp} is not a lattice point")
        seed_idx.append(k)
    return DomainGrid(points=points,
                      safe_seed=np.unique(np.asarray(seed_idx, dtype=np.intp)),
                      bounds=bounds, resolution=resolution)


@dataclass
class BoundState:
    """Contained intervals [l, u] per (point, output) plus diagnostics.

    l is elementwise nondecreasing and u nonincreasing across updates;
    an empty intersection keeps the previous interval and increments
    intersection_violations (assumption misspecification surfaced, not
    a crash).
    """

    l: np.ndarray                      # (P, q+1) extended reals
    u: np.ndarray
    intersection_violations: int = 0


def make_bounds(grid: DomainGrid, n_outputs: int) -> BoundState:
    """Initial contained set: seeds get [0, inf) on constraints."""
    if n_outputs < 2:
        raise ValueError("need at least one constraint output")
    P = grid.n_points
    l = np.full((P, n_outputs), -np.inf)
    u = np.full((P, n_outputs), np.inf)
    l[grid.safe_seed, 1:] = 0.0
    return BoundState(l=l, u=u)


@dataclass
class LoopState:
    """Safe/maximizer/expander membership and run history."""

    safe_set: np.ndarray               # (P,) bool
    maximizers: np.ndarray             # (P,) bool
    expanders: np.ndarray              # (P,) bool
    e_counts: np.ndarray               # (P,) int, 0 off the safe set
    iteration: int = 0
    best_guess_idx: int = -1
    history: list = field(default_factory=list)


def init_loop(grid: DomainGrid) -> LoopState:
    P = grid.n_points
    safe = np.zeros(P, dtype=bool)
    safe[grid.safe_seed] = True
    return LoopState(
        safe_set=safe,
        maximizers=np.zeros(P, dtype=bool),
        expanders=np.zeros(P, dtype=bool),
        e_counts=np.zeros(P, dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# interval sources

class NWIntervalModel:
    """Adapter feeding Nadaraya-Watson mu +- beta intervals to the loop.

    Tracks which grid points' intervals may have changed since the last
    poll: only points within one bandwidth of a new observation.  For
    grid points it keeps running kernel-mass and weighted-value sums,
    so serving intervals costs O(ball size) per iteration no matter how
    many observations have accumulated; the sums agree with a fresh
    estimator query up to summation order.
    """

    def __init__(self, estimator: EstimatorState, grid: DomainGrid):
        self.estimator = estimator
        self.grid = grid
        self._grid_tree = cKDTree(grid.points)
        self._dirty = set(range(grid.n_points))
        self._kappa = np.zeros(grid.n_points)
        self._wsum: Optional[np.ndarray] = None      # (P, q+1) once known

    def ingest(self, obs: Observation) -> None:
        self.estimator.ingest(obs)
        hit = np.asarray(self._grid_tree.query_ball_point(
            obs.point, self.estimator.kernel.bandwidth), dtype=np.intp)
        if self._wsum is None:
            self._wsum = np.zeros((self.grid.n_points, obs.values.size))
        if hit.size:
            d = np.linalg.norm(self.grid.points[hit] - obs.point, axis=1)
            w = pair_weights(self.estimator.kernel, d)
            self._kappa[hit] += w
            self._wsum[hit] += w[:, None] * obs.values[None, :]
        self._dirty.update(hit.tolist())

    def take_dirty(self) -> np.ndarray:
        idx = np.fromiter(self._dirty, dtype=np.intp,
                          count=len(self._dirty))
        idx.sort()
        self._dirty.clear()
        return idx

    def _finish(self, num, kap):
        est = self.estimator
        alpha = est._alpha_from_kappa(kap)
        with np.errstate(divide="ignore", invalid="ignore"):
            mu = np.where(kap[:, None] > 0, num / kap[:, None], np.nan)
            bet = np.where(
                kap > 0,
                est.lipschitz * est.kernel.bandwidth
                + 2.0 * est.sigma * alpha / kap,
                np.inf)
        have = kap > 0
        lo = np.where(have[:, None], mu - bet[:, None], -np.inf)
        hi = np.where(have[:, None], mu + bet[:, None], np.inf)
        return lo, hi

    def intervals_at(self, indices: np.ndarray):
        """Intervals at grid indices, from the running sums."""
        kap = self._kappa[indices]
        p = self.estimator.n_outputs or 1
        num = (np.zeros((len(indices), p)) if self._wsum is None
               else self._wsum[indices])
        return self._finish(num, kap)

    def intervals(self, points: np.ndarray):
        """Intervals at arbitrary points, via a full estimator query."""
        mu, kap, _, bet = self.estimator.query_batch(points)
        have = kap > 0
        lo = np.where(have[:, None], mu - bet[:, None], -np.inf)
        hi = np.where(have[:, None], mu + bet[:, None], np.inf)
        return lo, hi


def update_bounds(bounds: BoundState, estimator, grid: DomainGrid,
                  subset=None) -> np.ndarray:
    """Intersect fresh intervals into the contained set, in place.

    estimator is either an EstimatorState or any object with an
    intervals(points) -> (lo, hi) method.  subset restricts the update
    to those grid indices (callers that know which intervals moved).
    Returns the grid indices whose bounds actually changed.
    """
    if subset is None:
        subset = np.arange(grid.n_points)
    else:
        subset = np.asarray(subset, dtype=np.intp)
    if subset.size == 0:
        return subset
    if hasattr(estimator, "intervals_at"):
        lo, hi = estimator.intervals_at(subset)
    elif hasattr(estimator, "intervals"):
        lo, hi = estimator.intervals(grid.points[subset])
    else:
        mu, kap, _, bet = estimator.query_batch(grid.points[subset])
        have = kap > 0
        lo = np.where(have[:, None], mu - bet[:, None], -np.inf)
        hi = np.where(have[:, None], mu + bet[:, None], np.inf)
    l_old = bounds.l[subset]
    u_old = bounds.u[subset]
    new_l = np.maximum(l_old, lo)
    new_u = np.minimum(u_old, hi)
    bad = (lo > u_old) | (hi < l_old)
    if bad.any():
        bounds.intersection_violations += int(np.count_nonzero(bad))
        new_l[bad] = l_old[bad]
        new_u[bad] = u_old[bad]
    moved = (new_l > l_old) | (new_u < u_old)
    bounds.l[subset] = new_l
    bounds.u[subset] = new_u
    return subset[moved.any(axis=1)]


# ---------------------------------------------------------------------------
# set updates

def update_safe_set(loop: LoopState, bounds: BoundState, grid: DomainGrid,
                    L: float) -> np.ndarray:
    """S_n = points certified by some previous-safe witness, per constraint.

    a' enters S_n iff for every constraint i there is a in S_{n-1} with
    l(a, i) - L * ||a - a'|| >= 0.  A witness with l = 0 certifies only
    itself (distance 0); negative or -inf lower bounds certify nothing.
    """
    S_prev = loop.safe_set
    P = grid.n_points
    n_outputs = bounds.l.shape[1]
    ok = np.ones(P, dtype=bool)
    for i in range(1, n_outputs):
        li = bounds.l[:, i]
        cert = S_prev & (li >= 0)          # self-certification at distance 0
        wit = np.nonzero(S_prev & (li > 0))[0]
        if wit.size:
            D = cdist(grid.points, grid.points[wit])
            cert |= (li[wit][None, :] - L * D >= 0).any(axis=1)
        ok &= cert
    loop.safe_set = ok
    return ok


def compute_maximizers(loop: LoopState, bounds: BoundState) -> np.ndarray:
    """M_n: safe points whose reward upper bound reaches the best lower bound."""
    S = loop.safe_set
    assert S.any(), "safe set empty, seed invariant broken"
    l_best = bounds.l[S, 0].max()
    M = S & (bounds.u[:, 0] >= l_best)
    loop.maximizers = M
    return M


def compute_expanders(loop: LoopState, bounds: BoundState, grid: DomainGrid,
                      L: float) -> np.ndarray:
    """G_n: safe points that could certify at least one unsafe point.

    e_n(a) counts unsafe a' with u(a, i) - L * ||a - a'|| >= 0 for some
    constraint i; G_n keeps those with e_n > 0.  The count itself is
    recorded in traces.
    """
    S = loop.safe_set
    P = grid.n_points
    e = np.zeros(P, dtype=np.int64)
    unsafe = np.nonzero(~S)[0]
    cand = np.nonzero(S)[0]
    if unsafe.size and cand.size:
        umax = bounds.u[cand, 1:].max(axis=1)
        inf_mask = np.isinf(umax)
        e[cand[inf_mask]] = unsafe.size
        fin = cand[~inf_mask & (umax > 0)]
        if fin.size:
            ufin = bounds.u[fin, 1:].max(axis=1)
            if fin.size * unsafe.size <= _EXPANDER_DENSE_LIMIT:
                D = cdist(grid.points[fin], grid.points[unsafe])
                e[fin] = (ufin[:, None] - L * D >= 0).sum(axis=1)
            else:
                e[fin] = _expander_counts_tree(grid.points, fin, unsafe,
                                               ufin, L)
    G = S & (e > 0)
    loop.expanders = G
    loop.e_counts = e
    return G


def _expander_counts_tree(points, cand, unsafe, ucand, L):
    """kd-tree prefilter for the expander counts, exact via recheck.

    Pairs strictly inside the shrunken radius satisfy the predicate
    outright; pairs in the slack band between the shrunken and grown
    radii are rechecked with the exact expression.
    """
    tree = cKDTree(points[unsafe])
    r = ucand / L
    slack = 1e-9 * (1.0 + np.abs(r))
    n_lo = tree.query_ball_point(points[cand], r - slack, return_length=True)
    n_hi = tree.query_ball_point(points[cand], r + slack, return_length=True)
    counts = n_lo.astype(np.int64)
    border = np.nonzero(n_hi > n_lo)[0]
    for j in border:
        hits = tree.query_ball_point(points[cand[j]], r[j] + slack[j])
        d = np.linalg.norm(points[unsafe[hits]] - points[cand[j]], axis=1)
        inner = d < r[j] - slack[j]
        exact = ucand[j] - L * d >= 0
        counts[j] = int(np.count_nonzero(exact | inner))
    return counts


class _IncrementalSets:
    """Exact incremental replacement for update_safe_set / compute_expanders.

    Certification and expander counting are both threshold tests of the
    form value - L * distance >= 0 against the fixed grid, and the
    thresholds move monotonically as bounds intersect (l up, u down).
    With each point's grid distances kept sorted, one update is a batched
    bisection for the new cutoff rank plus a gather of the annulus
    between old and new rank, so per-iteration cost tracks how far the
    bounds actually moved rather than the set sizes.  Output is
    bit-identical to the batch routines (covered by tests): L*d <= v
    holds exactly when v - L*d >= 0 does, since float subtraction of
    doubles never flips sign.
    """

    def __init__(self, grid: DomainGrid, L: float, n_outputs: int):
        P = grid.n_points
        self.points = grid.points
        self.L = L
        self.P = P
        self.n_outputs = n_outputs
        self.queue = list(grid.safe_seed)          # witnesses to scan next
        self.cert = np.zeros((P, n_outputs - 1), dtype=bool)
        self.k_scan = np.zeros((P, n_outputs - 1), dtype=np.int64)
        self.e_counts = np.zeros(P, dtype=np.int64)
        self.umax = np.zeros(P)
        self.k_umax = np.zeros(P, dtype=np.int64)
        self.counted = np.zeros(P, dtype=bool)
        # per-row sorted grid distances, filled lazily: only rows that
        # ever act as witnesses or expander candidates pay for a sort,
        # and np.empty leaves unbuilt rows untouched in memory
        self._dist = np.empty((P, P))
        self._order = np.empty((P, P), dtype=np.int32)
        self._built = np.zeros(P, dtype=bool)
        self._steps = int(P).bit_length() + 1

    def _ensure(self, rows: np.ndarray) -> None:
        need = rows[~self._built[rows]]
        if need.size:
            D = cdist(self.points[need], self.points)
            o = np.argsort(D, axis=1)
            self._order[need] = o.astype(np.int32)
            self._dist[need] = np.take_along_axis(D, o, axis=1)
            self._built[need] = True

    def _rank(self, rows: np.ndarray, vals: np.ndarray) -> np.ndarray:
        """Per row, how many grid points pass vals - L * d >= 0."""
        lo = np.zeros(rows.size, dtype=np.int64)
        hi = np.full(rows.size, self.P, dtype=np.int64)
        for _ in range(self._steps):
            mid = (lo + hi) >> 1
            probe = self._dist[rows, np.minimum(mid, self.P - 1)]
            go = (lo < hi) & (self.L * probe <= vals)
            stay = (lo < hi) & ~go
            lo = np.where(go, mid + 1, lo)
            hi = np.where(stay, mid, hi)
        return lo

    def _annulus(self, rows, k0, k1):
        """Flat gather of order[rows[j], k0[j]:k1[j]] over rows with k0 < k1.

        Returns (rep, cols, keep): keep masks the input rows that had a
        nonempty range, rep maps each gathered column to its position in
        the kept subset.
        """
        lens = k1 - k0
        keep = lens > 0
        rows, k0, lens = rows[keep], k0[keep], lens[keep]
        if not rows.size:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty, keep
        rep = np.repeat(np.arange(rows.size), lens)
        base = np.repeat(k0, lens)
        off = np.arange(int(lens.sum())) - np.repeat(np.cumsum(lens) - lens, lens)
        cols = self._order[np.repeat(rows, lens), base + off].astype(np.int64)
        return rep, cols, keep

    def advance_safe(self, S_prev, bounds: BoundState, changed):
        """One safe-set step: returns (S_new, newly certified indices)."""
        wit = np.asarray(
            sorted(set(self.queue) | set(changed[S_prev[changed]].tolist())),
            dtype=np.intp)
        S_new = S_prev.copy()
        newly = np.empty(0, dtype=np.intp)
        if not wit.size or S_prev.all():
            self.queue = []
            return S_new, newly
        rows, vals, cis = [], [], []
        for i in range(1, self.n_outputs):
            wi = wit[bounds.l[wit, i] > 0]     # l = 0 reaches distance 0 only
            if wi.size:
                rows.append(wi)
                vals.append(bounds.l[wi, i])
                cis.append(np.full(wi.size, i - 1, dtype=np.int64))
        if rows:
            rows = np.concatenate(rows)
            vals = np.concatenate(vals)
            cis = np.concatenate(cis)
            self._ensure(rows)
            k_new = self._rank(rows, vals)
            k_old = self.k_scan[rows, cis]
            grew = k_new > k_old
            if grew.any():
                # rows inside the old rank were certified when that rank
                # was first reached; only the annulus is new
                rep, cols, keep = self._annulus(
                    rows[grew], k_old[grew], k_new[grew])
                self.cert[cols, cis[grew][keep][rep]] = True
            self.k_scan[rows, cis] = np.maximum(k_new, k_old)
        newly = np.nonzero(~S_prev & self.cert.all(axis=1))[0]
        S_new[newly] = True
        self.queue = newly.tolist()
        return S_new, newly

    def advance_expanders(self, S_new, bounds: BoundState, changed, newly):
        """One expander-count step: returns counts masked to S_new."""
        unsafe_n = int(self.P - S_new.sum())
        if newly.size:
            done = np.nonzero(self.counted)[0]
            if done.size:
                # departed points stop counting; judge their contribution
                # against the same stored threshold they entered under
                D = cdist(self.points[done], self.points[newly])
                self.e_counts[done] -= (
                    self.umax[done][:, None] - self.L * D >= 0).sum(axis=1)
        redo_mask = S_new & ~self.counted
        redo_mask[changed[S_new[changed]]] = True
        redo_mask[newly] = True
        redo = np.nonzero(redo_mask)[0]
        if redo.size:
            first = redo[~self.counted[redo]]
            self.e_counts[first] = unsafe_n    # +inf threshold passes all
            self.k_umax[first] = self.P
            self.umax[first] = np.inf
            self.counted[first] = True
            um = bounds.u[redo, 1:].max(axis=1)
            self._ensure(redo)
            k_new = self._rank(redo, um)
            k_old = self.k_umax[redo]
            shrunk = k_new < k_old
            if shrunk.any():
                rep, cols, keep = self._annulus(
                    redo[shrunk], k_new[shrunk], k_old[shrunk])
                kept = redo[shrunk][keep]
                drop = np.bincount(rep[~S_new[cols]], minlength=kept.size)
                self.e_counts[kept] -= drop
            self.k_umax[redo] = k_new
            self.umax[redo] = um
        return np.where(S_new, self.e_counts, 0)


def select_next(loop: LoopState, bounds: BoundState):
    """Widest-interval point among M_n union G_n, or CONVERGED.

    Width is max over all outputs of u - l; +inf widths dominate and
    ties go to the smallest grid index.
    """
    cand = np.nonzero(loop.maximizers | loop.expanders)[0]
    if cand.size == 0:
        return CONVERGED
    w = (bounds.u[cand] - bounds.l[cand]).max(axis=1)
    return int(cand[np.argmax(w)])


def best_guess(loop: LoopState, bounds: BoundState) -> int:
    """Safe point with the largest reward lower bound (smallest index wins)."""
    S = np.nonzero(loop.safe_set)[0]
    assert S.size, "safe set empty, seed invariant broken"
    return int(S[np.argmax(bounds.l[S, 0])])


# ---------------------------------------------------------------------------
# the optimization loop

@dataclass
class TraceRecord:
    n: int
    index: int
    point: np.ndarray
    values: np.ndarray
    safe_size: int
    max_size: int
    exp_size: int
    e_chosen: int
    t_bounds_ms: float
    t_sets_ms: float
    t_select_ms: float
    t_ingest_ms: float
    violations_true: Optional[int]
    best_guess_idx: int
    best_guess_lb: float


@dataclass
class RunResult:
    records: List[TraceRecord]
    loop: LoopState
    bounds: BoundState
    model: object
    converged: bool
    best_guess_idx: int
    intersection_violations: int
    snapshots: Optional[dict]


def run(problem, model, budget: int, seed: int,
        record_sets: bool = False, record_timing: bool = True,
        incremental: bool = True,
        on_record: Optional[Callable] = None) -> RunResult:
    """Run the safe optimization loop for up to `budget` evaluations.

    problem: a benchmarks.ProblemSpec.  model: an interval source with
    ingest / intervals / take_dirty (NWIntervalModel or the GP
    adapter).  Stops early when maximizers and expanders are both
    empty.  With incremental=True the safe-set update processes only
    witnesses whose bounds moved (exactly equivalent to the full
    recomputation; covered by tests).
    """
    from .benchmarks import evaluate, true_values

    if budget < 1:
        raise ValueError("budget must be >= 1")
    grid = problem.grid
    n_outputs = problem.n_constraints + 1
    L = problem.lipschitz
    bounds = make_bounds(grid, n_outputs)
    loop = init_loop(grid)
    inc = _IncrementalSets(grid, L, n_outputs) if incremental else None

    snapshots = {"safe": [], "max": [], "exp": [], "l": [], "u": []} \
        if record_sets else None
    records: List[TraceRecord] = []
    converged = False
    clock = time.perf_counter

    for n in range(1, budget + 1):
        loop.iteration = n

        t0 = clock()
        dirty = model.take_dirty()
        changed = update_bounds(bounds, model, grid, subset=dirty)
        t1 = clock()

        S_prev = loop.safe_set
        if inc is not None:
            S_new, newly = inc.advance_safe(S_prev, bounds, changed)
            loop.safe_set = S_new
            compute_maximizers(loop, bounds)
            loop.e_counts = inc.advance_expanders(S_new, bounds, changed, newly)
            loop.expanders = S_new & (loop.e_counts > 0)
        else:
            update_safe_set(loop, bounds, grid, L)
            compute_maximizers(loop, bounds)
            compute_expanders(loop, bounds, grid, L)
        t2 = clock()

        choice = select_next(loop, bounds)
        loop.best_guess_idx = best_guess(loop, bounds)
        t3 = clock()

        if record_sets:
            snapshots["safe"].append(loop.safe_set.copy())
            snapshots["max"].append(loop.maximizers.copy())
            snapshots["exp"].append(loop.expanders.copy())
            snapshots["l"].append(bounds.l.copy())
            snapshots["u"].append(bounds.u.copy())

        if choice is CONVERGED:
            converged = True
            break
        assert loop.safe_set[choice], "selected point escaped the safe set"

        point = grid.points[choice]
        eval_seed = rng.derived_seed(seed, "problem", n)
        values = evaluate(problem, point, eval_seed)
        obs = Observation(point=point, values=values, iteration=n)
        model.ingest(obs)
        t4 = clock()

        viol = None
        if problem.has_ground_truth:
            truth = true_values(problem, point)
            viol = int(np.any(truth[1:] < 0))

        rec = TraceRecord(
            n=n, index=choice, point=point.copy(), values=values,
            safe_size=int(loop.safe_set.sum()),
            max_size=int(loop.maximizers.sum()),
            exp_size=int(loop.expanders.sum()),
            e_chosen=int(loop.e_counts[choice]),
            t_bounds_ms=(t1 - t0) * 1e3 if record_timing else 0.0,
            t_sets_ms=(t2 - t1) * 1e3 if record_timing else 0.0,
            t_select_ms=(t3 - t2) * 1e3 if record_timing else 0.0,
            t_ingest_ms=(t4 - t3) * 1e3 if record_timing else 0.0,
            violations_true=viol,
            best_guess_idx=loop.best_guess_idx,
            best_guess_lb=float(bounds.l[loop.best_guess_idx, 0]),
        )
        records.append(rec)
        loop.history.append(rec)
        if on_record is not None:
            on_record(rec)

    return RunResult(
        records=records, loop=loop, bounds=bounds, model=model,
        converged=converged, best_guess_idx=best_guess(loop, bounds),
        intersection_violations=bounds.intersection_violations,
        snapshots=snapshots,
    )
