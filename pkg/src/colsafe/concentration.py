"""Monte-Carlo verification of the concentration bounds.

Two checks:

* self-normalized bound: with S_n = sum_t v_t w_t for predictable
  bounded weights v_t and sigma-sub-Gaussian noise w_t, the event

      |S_n| > sqrt(2 sigma^2 (1 + V_n) log(sqrt(1 + V_n) / delta)),

  V_n = sum_t v_t^2, has probability at most delta.  The bound is
  loose in practice, so empirical rates sit well below delta.

* supermartingale: the exponential process
  w_n(eta) = exp(sum_t (eta w_t v_t / sigma - eta^2 v_t^2 / 2))
  has expectation at most 1 for every fixed eta.  For Gaussian noise
  the expectation is exactly 1, so the empirical mean hovers at 1
  within Monte-Carlo error; bounded noise families sit below.

Noise families: "gaussian" (scale sigma) and "rademacher"
(+-sigma with equal probability), both sigma-sub-Gaussian; a second
family guards against Gaussian-specific coincidences.  bound_scale
is a test hook that multiplies the bound (0.1 forces failures).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng

_CHUNK = 2000


@dataclass(frozen=True)
class ConcentrationConfig:
    n: int
    sigma: float
    delta: float
    trials: int
    seed: int = 0
    noise: str = "gaussian"
    bound_scale: float = 1.0

    def __post_init__(self):
        if self.n < 1 or self.trials < 1:
            raise ValueError("n and trials must be >= 1")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.noise not in ("gaussian", "rademacher"):
            raise ValueError(f"unknown noise family {self.noise!r}")


def _draw_noise(gen: np.random.Generator, cfg: ConcentrationConfig, shape):
    if cfg.noise == "gaussian":
        return cfg.sigma * gen.standard_normal(shape)
    return cfg.sigma * (2.0 * gen.integers(0, 2, shape) - 1.0)


def check_self_normalized_bound(cfg: ConcentrationConfig) -> float:
    """Fraction of trials where |S_n| exceeds the bound."""
    violations = 0
    done = 0
    chunk_id = 0
    while done < cfg.trials:
        m = min(_CHUNK, cfg.trials - done)
        gen = rng.stream(cfg.seed, "selfnorm", chunk_id)
        v = gen.uniform(0.0, 1.0, (m, cfg.n))
        w = _draw_noise(gen, cfg, (m, cfg.n))
        S = np.abs((v * w).sum(axis=1))
        V = (v * v).sum(axis=1)
        bound = cfg.bound_scale * np.sqrt(
            2.0 * cfg.sigma ** 2 * (1.0 + V)
            * np.log(np.sqrt(1.0 + V) / cfg.delta))
        violations += int(np.count_nonzero(S > bound))
        done += m
        chunk_id += 1
    return violations / cfg.trials


def check_supermartingale(cfg: ConcentrationConfig, eta: float):
    """Empirical mean of w_n(eta); returns (mean, stderr, overflows).

    Trials whose exponent would overflow exp are excluded from the
    mean and counted in overflows instead of being silently dropped
    into inf.
    """
    if not np.isfinite(eta):
        raise ValueError("eta must be finite")
    total = 0.0
    total_sq = 0.0
    count = 0
    overflows = 0
    done = 0
    chunk_id = 0
    while done < cfg.trials:
        m = min(_CHUNK, cfg.trials - done)
        gen = rng.stream(cfg.seed, "martingale", chunk_id)
        v = gen.uniform(0.0, 1.0, (m, cfg.n))
        w = _draw_noise(gen, cfg, (m, cfg.n))
        expo = (eta * w * v / cfg.sigma - 0.5 * eta * eta * v * v).sum(axis=1)
        ok = expo < 700.0
        overflows += int(np.count_nonzero(~ok))
        vals = np.exp(expo[ok])
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        count += int(ok.sum())
        done += m
        chunk_id += 1
    if count == 0:
        return float("inf"), 0.0, overflows
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    stderr = np.sqrt(var / count)
    return mean, stderr, overflows


def run_matrix(deltas, ns, trials, sigma, noises, etas, mg_n, mg_trials,
               seed, bound_scale: float = 1.0) -> dict:
    """Full verification matrix; returns a JSON-ready report."""
    cells = []
    for noise in noises:
        for delta in deltas:
            for n in ns:
                cfg = ConcentrationConfig(
                    n=int(n), sigma=sigma, delta=float(delta),
                    trials=int(trials),
                    seed=rng.derived_seed(seed, "cell", noise, str(n),
                                          str(delta)),
                    noise=noise, bound_scale=bound_scale)
                rate = check_self_normalized_bound(cfg)
                cells.append({
                    "noise": noise, "delta": float(delta), "n": int(n),
                    "trials": int(trials), "rate": rate,
                    "pass": bool(rate <= delta),
                })
    martingale = []
    for noise in noises:
        for eta in etas:
            cfg = ConcentrationConfig(
                n=int(mg_n), sigma=sigma, delta=0.5, trials=int(mg_trials),
                seed=rng.derived_seed(seed, "mg", noise, str(eta)),
                noise=noise)
            mean, stderr, overflows = check_supermartingale(cfg, float(eta))
            martingale.append({
                "noise": noise, "eta": float(eta), "n": int(mg_n),
                "trials": int(mg_trials), "mean": mean, "stderr": stderr,
                "overflows": overflows,
                "pass": bool(mean <= 1.0 + 3.0 * stderr),
            })
    ok = all(c["pass"] for c in cells) and all(m["pass"] for m in martingale)
    return {"cells": cells, "martingale": martingale, "pass": ok}
