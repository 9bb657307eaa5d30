"""Compactly supported smoothing kernels.

A kernel here is a bounded nonnegative function K on [0, inf) with
K(v) = 0 for every v > 1.  The pairwise weight used by the estimator is

    K_lam(a, a') = K(||a - a'|| / lam) / c_K,

with c_K the maximum of the base kernel, so weights live in [0, 1] and
vanish beyond distance lam.  The support boundary v = 1 is inclusive:
only v > 1 is forced to zero, so the boxcar keeps weight 1 at exactly
distance lam while the Epanechnikov kernel happens to reach 0 there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FAMILIES = ("epanechnikov", "boxcar", "truncated_matern32")

_SQRT3 = np.sqrt(3.0)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus bandwidth.

    Parameters
    ----------
    family : str
        One of "epanechnikov", "boxcar", "truncated_matern32".
    bandwidth : float
        Support radius lam in parameter-space distance units.
    length_scale : float
        Matern length scale; only read by truncated_matern32.
    c_K : float
        Upper bound of the base kernel.  All shipped families attain
        their maximum at v = 0, so this is fixed analytically per
        family (1.0 for every one of them), not estimated.
    """

    family: str
    bandwidth: float
    length_scale: float = 1.0
    c_K: float = field(init=False, default=1.0)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        if not self.length_scale > 0:
            raise ValueError("length_scale must be positive")


def _base_array(spec: KernelSpec, v: np.ndarray) -> np.ndarray:
    """Vectorized base kernel K(v) for v >= 0."""
    v = np.asarray(v, dtype=float)
    if spec.family == "epanechnikov":
        out = np.where(v <= 1.0, 1.0 - v * v, 0.0)
    elif spec.family == "boxcar":
        out = np.where(v <= 1.0, 1.0, 0.0)
    else:  # truncated_matern32
        s = _SQRT3 * v / spec.length_scale
        out = np.where(v <= 1.0, (1.0 + s) * np.exp(-s), 0.0)
    return out


def evaluate_base(spec: KernelSpec, v: float) -> float:
    """Base kernel value K(v).

    Exactly 0 for v > 1; raises on negative v.
    """
    if v < 0:
        raise ValueError(f"negative normalized distance {v}")
    return float(_base_array(spec, np.asarray(v)))


def evaluate_pair(spec: KernelSpec, a, b) -> float:
    """Normalized weight K(||a - b|| / lam) / c_K, in [0, 1]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    v = float(np.linalg.norm(a - b)) / spec.bandwidth
    return evaluate_base(spec, v) / spec.c_K


def pair_weights(spec: KernelSpec, distances: np.ndarray) -> np.ndarray:
    """Normalized weights for an array of raw distances.

    Internal vectorized form of evaluate_pair used by the estimator;
    distances are raw (not divided by the bandwidth).
    """
    d = np.asarray(distances, dtype=float)
    return _base_array(spec, d / spec.bandwidth) / spec.c_K
