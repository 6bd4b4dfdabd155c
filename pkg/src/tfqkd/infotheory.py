"""
Information quantities of a binned bivariate Gaussian: bin masses, Shannon
entropy, mutual information, reconciliation leakage and average bin distance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import ndtr

from .exceptions import ConfigError
from .model import GaussianJoint
from .uncertainty import MeasurementGrid

__all__ = [
    "BinnedDistribution",
    "bin_probabilities",
    "marginal_bin_probabilities",
    "shannon_entropy",
    "mutual_information",
    "reconciliation_leakage",
    "average_distance",
]

# Beyond this many standard deviations bin masses are below 1e-40.
_SIGMA_REACH = 14.0


@dataclass(frozen=True)
class BinnedDistribution:
    """Bin probabilities; ``probs`` is 1-D for a marginal or ``M x M`` for a joint."""

    grid: MeasurementGrid
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", p)
        if np.any(p < -1e-15):
            raise ConfigError("probabilities must be non-negative")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ConfigError(f"probabilities sum to {p.sum()!r}, not 1")

    @property
    def is_joint(self) -> bool:
        return self.probs.ndim == 2

    def marginal(self, axis: int = 0) -> "BinnedDistribution":
        if not self.is_joint:
            return self
        return BinnedDistribution(self.grid, self.probs.sum(axis=1 - axis))


def marginal_bin_probabilities(var: float, grid: MeasurementGrid) -> np.ndarray:
    """Masses of a centred normal of variance ``var`` in each bin of ``grid``."""
    cdf = ndtr(grid.edges / math.sqrt(var))
    return np.diff(np.concatenate(([0.0], cdf, [1.0])))


def _joint_masses(var_A, var_B, cov, edges_A, edges_B):
    sA = math.sqrt(var_A)
    slope = cov / var_A
    s_cond = math.sqrt(var_B - cov * cov / var_A)
    ext_B = np.concatenate(([-np.inf], edges_B, [np.inf]))
    bounds = np.concatenate(([-_SIGMA_REACH * sA], edges_A, [_SIGMA_REACH * sA]))
    M_A, M_B = len(edges_A) + 1, len(edges_B) + 1
    out = np.zeros((M_A, M_B))

    def row(x):
        dens = math.exp(-0.5 * (x / sA) ** 2) / (sA * math.sqrt(2 * math.pi))
        return dens * np.diff(ndtr((ext_B - slope * x) / s_cond))

    for i in range(M_A):
        lo, hi = max(bounds[i], bounds[0]), min(bounds[i + 1], bounds[-1])
        if hi <= lo:
            continue
        out[i], _ = quad_vec(row, lo, hi, epsabs=1e-13, epsrel=1e-10)
    return out


@lru_cache(maxsize=64)
def _joint_cached(var_A, var_B, cov, grid_A, grid_B):
    return _joint_masses(var_A, var_B, cov, grid_A.edges, grid_B.edges)


def bin_probabilities(
    joint: GaussianJoint,
    grid_A: MeasurementGrid,
    grid_B: MeasurementGrid | None = None,
) -> BinnedDistribution:
    """Joint bin masses of Alice's and Bob's outcomes.

    Each row is integrated over Alice's bin with adaptive quadrature of the
    marginal density times Bob's conditional-normal bin masses. Degenerate
    (perfectly correlated) joints put all mass on the diagonal.
    """
    grid_B = grid_A if grid_B is None else grid_B
    if joint.var_A * joint.var_B - joint.cov_AB**2 <= 0:
        if grid_A != grid_B or joint.var_A != joint.var_B or joint.cov_AB <= 0:
            raise ConfigError("joint covariance must be positive definite")
        marg = marginal_bin_probabilities(joint.var_A, grid_A)
        return BinnedDistribution(grid_A, np.diag(marg))
    probs = _joint_cached(joint.var_A, joint.var_B, joint.cov_AB, grid_A, grid_B)
    # quadrature error is ~1e-13 per cell; renormalise so sums are exact
    probs = np.clip(probs, 0.0, None)
    return BinnedDistribution(grid_A, probs / probs.sum())


def shannon_entropy(dist) -> float:
    """Shannon entropy in bits of a distribution (any shape); ``0 log 0 = 0``."""
    p = np.asarray(dist.probs if isinstance(dist, BinnedDistribution) else dist, dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def mutual_information(joint) -> float:
    p = np.asarray(joint.probs if isinstance(joint, BinnedDistribution) else joint, dtype=float)
    if p.ndim != 2:
        raise ValueError("mutual information needs a joint distribution")
    mi = shannon_entropy(p.sum(axis=1)) + shannon_entropy(p.sum(axis=0)) - shannon_entropy(p)
    return max(0.0, mi)


def reconciliation_leakage(n_X: float, H_A: float, I_AB: float, beta: float) -> float:
    """Bits disclosed by error correction at efficiency ``beta``."""
    if not 0 <= beta <= 1:
        raise ConfigError("reconciliation efficiency must lie in [0, 1]")
    return max(0.0, n_X * (H_A - beta * I_AB))


def average_distance(a, b) -> float:
    """Mean absolute label difference between two equal-length strings."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("strings must be non-empty")
    if a.dtype.kind in "iub" and b.dtype.kind in "iub":
        a, b = a.astype(np.int64), b.astype(np.int64)
    return float(np.mean(np.abs(a - b)))
