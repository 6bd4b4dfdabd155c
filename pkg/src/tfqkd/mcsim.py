"""
Monte Carlo oracle for the analytic model.

Draws correlated Gaussian outcome pairs, bins them, and estimates the average
bin distance; also resamples counts so the decoy bounds can be checked against
their stated confidence.

Random streams are derived from ``(seed, chunk_index)`` through
:class:`numpy.random.SeedSequence` feeding a counter-based Philox generator,
so results do not depend on how chunks are scheduled across workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .infotheory import average_distance, mutual_information
from .model import Basis, GaussianJoint, ObservedCounts, SourceSpec, intensity_given_n
from .uncertainty import MeasurementGrid

__all__ = [
    "SampleRun",
    "rng_for",
    "sample_pairs",
    "estimate_distance",
    "empirical_mutual_information",
    "sample_counts",
    "sample_photon_resolved",
]

CHUNK = 1 << 18


def rng_for(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator for task ``index`` of a run seeded with ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed) & (2**64 - 1), int(index)])))


@dataclass(frozen=True)
class SampleRun:
    seed: int
    n_samples: int
    basis: Basis
    grid: MeasurementGrid
    a: np.ndarray
    b: np.ndarray
    d_hat: float

    @property
    def histogram(self) -> np.ndarray:
        """Counts of Alice's labels, one per bin."""
        return np.bincount(self.a, minlength=self.grid.M)

    def joint_histogram(self) -> np.ndarray:
        M = self.grid.M
        return np.bincount(self.a * M + self.b, minlength=M * M).reshape(M, M)

    @property
    def d_stderr(self) -> float:
        diff = np.abs(self.a.astype(np.int64) - self.b.astype(np.int64))
        return float(diff.std(ddof=1) / math.sqrt(self.n_samples)) if self.n_samples > 1 else math.nan


def _draw_chunk(joint: GaussianJoint, n: int, rng: np.random.Generator):
    sA, sB = math.sqrt(joint.var_A), math.sqrt(joint.var_B)
    rho = joint.rho
    z = rng.standard_normal((2, n))
    x = sA * z[0]
    if abs(rho) >= 1.0:
        y = math.copysign(sB / sA, rho) * x
    else:
        y = sB * (rho * z[0] + math.sqrt(1 - rho * rho) * z[1])
    return x, y


def _labels_chunk(args):
    joint, grid, n, seed, index = args
    x, y = _draw_chunk(joint, n, rng_for(seed, index))
    return grid.labels(x).astype(np.int32), grid.labels(y).astype(np.int32)


def sample_pairs(
    joint: GaussianJoint,
    grid: MeasurementGrid,
    n: int,
    seed: int = 0,
    workers: int = 1,
    chunk: int = CHUNK,
) -> SampleRun:
    """Draw ``n`` outcome pairs from ``joint`` and bin both on ``grid``.

    Output is identical for any ``workers``; chunks are merged in index order.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be at least 1")
    sizes = [min(chunk, n - start) for start in range(0, n, chunk)]
    tasks = [(joint, grid, size, seed, i) for i, size in enumerate(sizes)]
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_labels_chunk, tasks))
    else:
        parts = [_labels_chunk(t) for t in tasks]
    a = np.concatenate([p[0] for p in parts])
    b = np.concatenate([p[1] for p in parts])
    return SampleRun(seed=seed, n_samples=n, basis=joint.basis, grid=grid, a=a, b=b, d_hat=average_distance(a, b))


def estimate_distance(joint: GaussianJoint, grid: MeasurementGrid, n: int = 10**6, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo average bin distance and its standard error."""
    run = sample_pairs(joint, grid, n, seed)
    return run.d_hat, run.d_stderr


def empirical_mutual_information(run: SampleRun) -> float:
    """Plug-in mutual information (bits) of the sampled label pairs."""
    h = run.joint_histogram().astype(float)
    return mutual_information(h / h.sum())


def sample_counts(expected: ObservedCounts, seed: int = 0) -> ObservedCounts:
    """Poisson resampling of every count, keeping the expected values as means."""
    rng = rng_for(seed)
    draw = lambda mean: rng.poisson(np.asarray(mean, dtype=float)).astype(float)
    return ObservedCounts(
        N=expected.N,
        n_X_mu=draw(expected.n_X_mu),
        n_P_mu=draw(expected.n_P_mu),
        m_P_mu=draw(expected.m_P_mu),
    )


def sample_photon_resolved(n_by_photon, source: SourceSpec, seed: int = 0) -> np.ndarray:
    """Assign photon-number-resolved events to intensities.

    ``n_by_photon[n]`` events that came from ``n``-photon emissions are split
    across the three intensities with the posterior ``p(mu_k | n)``; returns the
    per-intensity totals, which is what an experiment observes.
    """
    rng = rng_for(seed)
    totals = np.zeros(3)
    for n, count in enumerate(np.asarray(n_by_photon, dtype=np.int64)):
        if count == 0:
            continue
        probs = np.array([intensity_given_n(k, n, source) for k in range(3)])
        totals += rng.multinomial(int(count), probs / probs.sum())
    return totals
