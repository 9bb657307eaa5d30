import math

import numpy as np
import pytest

from colsafe.kernel import KernelSpec, evaluate_pair
from colsafe.nw_estimator import (NO_DATA, EstimatorState, Observation)
from colsafe import rng


def naive_query(est, a):
    """Reference implementation: plain scan over all stored observations."""
    pts = est.points
    vals = est.values
    if len(pts) == 0:
        return None, 0.0
    w = np.array([evaluate_pair(est.kernel, a, p) for p in pts])
    kap = w.sum()
    if kap == 0.0:
        return None, 0.0
    mu = (w[:, None] * vals).sum(axis=0) / kap
    return mu, kap


def naive_alpha(kap, delta):
    if kap <= 1.0:
        return math.sqrt(math.log(math.sqrt(2.0) / delta))
    return math.sqrt(kap * math.log(math.sqrt(1.0 + kap) / delta))


def make_est(bandwidth=0.3, sigma=0.05, delta=0.1, family="epanechnikov"):
    spec = KernelSpec(family=family, bandwidth=bandwidth, length_scale=0.1)
    return EstimatorState(spec, sigma=sigma, delta=delta, lipschitz=1.0)


def fill(est, n, d=2, p=3, seed=0):
    g = rng.stream(seed, "fill")
    for t in range(1, n + 1):
        pt = g.uniform(0, 1, size=d)
        vals = g.standard_normal(p)
        est.ingest(Observation(point=pt, values=vals, iteration=t))
    return est


def test_observation_validation():
    with pytest.raises(ValueError):
        Observation(point=np.array([0.1]), values=np.array([np.nan]),
                    iteration=1)
    with pytest.raises(ValueError):
        Observation(point=np.array([0.1]), values=np.array([1.0]),
                    iteration=0)
    with pytest.raises(ValueError):
        Observation(point=np.array([[0.1]]), values=np.array([1.0]),
                    iteration=1)


def test_empty_estimator_reports_no_data():
    est = make_est()
    a = np.array([0.5, 0.5])
    assert est.kappa(a) == 0.0
    assert est.mu(a, 0) is NO_DATA
    assert est.beta(a) == math.inf
    r = est.estimate(a)
    assert r.mu is NO_DATA and r.kappa == 0.0 and r.beta == math.inf
    # alpha is still defined at kappa=0 (small-mass branch)
    assert est.alpha(a) == pytest.approx(naive_alpha(0.0, 0.1))


def test_far_query_no_data():
    est = make_est(bandwidth=0.1)
    est.ingest(Observation(point=np.array([0.0, 0.0]),
                           values=np.array([1.0, 2.0]), iteration=1))
    a = np.array([5.0, 5.0])
    assert est.kappa(a) == 0.0
    assert est.mu(a, 1) is NO_DATA
    assert est.beta(a) == math.inf


def test_single_observation_recovers_value():
    est = make_est(bandwidth=0.3)
    v = np.array([0.7, -1.2])
    est.ingest(Observation(point=np.array([0.2, 0.2]), values=v, iteration=1))
    mu = est.mu(np.array([0.2, 0.2]), 0)
    assert mu == pytest.approx(0.7)
    assert est.mu(np.array([0.2, 0.2]), 1) == pytest.approx(-1.2)


def test_alpha_frozen_values():
    est = make_est(delta=0.1)
    # kappa = 4 lands in the large-mass branch; value computed separately
    a = est._alpha_from_kappa(np.array([4.0]))[0]
    assert a == pytest.approx(3.525509352823274, rel=1e-12)
    a0 = est._alpha_from_kappa(np.array([0.5]))[0]
    assert a0 == pytest.approx(1.6276236307187293, rel=1e-12)
    # both branches agree at kappa = 1
    lo = est._alpha_from_kappa(np.array([np.nextafter(1.0, 0.0)]))[0]
    hi = est._alpha_from_kappa(np.array([np.nextafter(1.0, 2.0)]))[0]
    assert lo == pytest.approx(hi, rel=1e-6)


def test_beta_frozen_value():
    # L=1.75, lam=0.5, sigma=0.1, kappa=4, delta=0.1
    spec = KernelSpec(family="boxcar", bandwidth=0.5)
    est = EstimatorState(spec, sigma=0.1, delta=0.1, lipschitz=1.75)
    for t in range(1, 5):
        est.ingest(Observation(point=np.array([0.0]),
                               values=np.array([0.0]), iteration=t))
    a = np.array([0.0])
    assert est.kappa(a) == pytest.approx(4.0)
    assert est.beta(a) == pytest.approx(1.0512754676411638, rel=1e-12)


def test_matches_naive_scan():
    est = make_est(bandwidth=0.25, family="truncated_matern32")
    fill(est, 200, seed=7)
    g = rng.stream(1, "queries")
    for _ in range(50):
        a = g.uniform(-0.2, 1.2, size=2)
        mu_ref, kap_ref = naive_query(est, a)
        assert est.kappa(a) == pytest.approx(kap_ref, rel=1e-12, abs=1e-15)
        if mu_ref is None:
            assert est.mu(a, 0) is NO_DATA
        else:
            for i in range(3):
                assert est.mu(a, i) == pytest.approx(mu_ref[i], rel=1e-10,
                                                     abs=1e-12)
            assert est.alpha(a) == pytest.approx(
                naive_alpha(kap_ref, est.delta), rel=1e-10)


def test_query_batch_matches_scalar():
    est = make_est(bandwidth=0.3)
    fill(est, 150, seed=3)
    g = rng.stream(2, "queries")
    Q = g.uniform(0, 1, size=(40, 2))
    mu, kap, alp, bet = est.query_batch(Q)
    for j in range(40):
        r = est.estimate(Q[j])
        assert kap[j] == pytest.approx(est.kappa(Q[j]), rel=1e-12)
        if r.mu is NO_DATA:
            assert np.isnan(mu[j]).all()
            assert bet[j] == math.inf
        else:
            assert mu[j, 0] == pytest.approx(r.mu, rel=1e-12)
            assert bet[j] == pytest.approx(r.beta, rel=1e-12)
        assert alp[j] == pytest.approx(est.alpha(Q[j]), rel=1e-12)


def test_batch_across_index_rebuilds():
    # answers must not depend on where the tree/buffer split currently sits
    est = make_est(bandwidth=0.35)
    ref = make_est(bandwidth=0.35)
    g = rng.stream(11, "pts")
    a = np.array([0.4, 0.6])
    for t in range(1, 70):
        pt = g.uniform(0, 1, size=2)
        vals = g.standard_normal(3)
        est.ingest(Observation(point=pt, values=vals, iteration=t))
        ref.ingest(Observation(point=pt, values=vals, iteration=t))
        mu_ref, kap_ref = naive_query(ref, a)
        assert est.kappa(a) == pytest.approx(kap_ref, rel=1e-12, abs=1e-15)
        if mu_ref is not None:
            assert est.mu(a, 0) == pytest.approx(mu_ref[0], rel=1e-10)


def test_radius_neighbors_sorted_and_complete():
    est = make_est(bandwidth=0.2)
    fill(est, 120, seed=5)
    a = np.array([0.5, 0.5])
    idx = est.radius_neighbors(a)
    assert np.all(np.diff(idx) > 0)
    d = np.linalg.norm(est.points - a, axis=1)
    expect = np.nonzero(d <= 0.2)[0]
    np.testing.assert_array_equal(idx, expect)


def test_beta_decreases_with_mass():
    # more nearby data -> tighter interval
    est = make_est(bandwidth=0.3, sigma=0.05)
    a = np.array([0.5, 0.5])
    prev = math.inf
    g = rng.stream(9, "near")
    for t in range(1, 30):
        pt = a + g.uniform(-0.05, 0.05, size=2)
        est.ingest(Observation(point=pt, values=np.array([1.0]), iteration=t))
        b = est.beta(a)
        assert b <= prev + 1e-12
        prev = b


def test_mixed_output_width():
    est = make_est()
    est.ingest(Observation(point=np.zeros(2), values=np.zeros(3), iteration=1))
    with pytest.raises(ValueError):
        est.ingest(Observation(point=np.zeros(2), values=np.zeros(2),
                               iteration=2))


def test_dimension_mismatch_on_ingest():
    est = make_est()
    est.ingest(Observation(point=np.zeros(2), values=np.zeros(1), iteration=1))
    with pytest.raises(ValueError):
        est.ingest(Observation(point=np.zeros(3), values=np.zeros(1),
                               iteration=2))
