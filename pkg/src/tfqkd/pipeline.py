"""End-to-end evaluation of one operating point from a :class:`RunConfig`."""
from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

from .config import RunConfig
from .decoy import estimate_bounds
from .finitekey import EPS_DIVISOR, EpsilonBudget, KeyRateReport, cutoff_requirements, key_length, throughput
from .infotheory import bin_probabilities, mutual_information, reconciliation_leakage, shannon_entropy
from .mcsim import estimate_distance
from .model import Basis, expected_counts, gaussian_joint
from .uncertainty import MeasurementGrid, cutoff_from_budget, tail_mass

__all__ = ["analyze", "scan", "grids_for", "frame_requirements"]


def _bin_width(config: RunConfig, basis: Basis) -> float:
    return config.delta_t if basis is Basis.TIME else config.delta_w_rad


def grids_for(config: RunConfig, n_X: float) -> tuple[MeasurementGrid, MeasurementGrid]:
    """Key and check grids whose cutoffs fit the configured tail budget."""
    source = config.source()
    total = config.tail_fraction * config.eps_s / EPS_DIVISOR
    out = []
    for basis, share in ((config.basis, config.tail_split), (config.basis.other, 1 - config.tail_split)):
        V = gaussian_joint(basis, source).var_A
        Delta = cutoff_from_budget(V, max(n_X, 1.0), total * share)
        out.append(MeasurementGrid.covering(basis, _bin_width(config, basis), Delta))
    return tuple(out)


@lru_cache(maxsize=32)
def _key_entropies(config: RunConfig, grid: MeasurementGrid) -> tuple[float, float]:
    joint = gaussian_joint(config.basis, config.source())
    dist = bin_probabilities(joint, grid)
    return shannon_entropy(dist.marginal()), mutual_information(dist)


@lru_cache(maxsize=32)
def _mc_distance(config: RunConfig, grid: MeasurementGrid) -> float:
    joint = gaussian_joint(grid.basis, config.source())
    return estimate_distance(joint, grid, config.mc_samples, config.seed)[0]


def _cache_key(config: RunConfig) -> RunConfig:
    # entropies and MC distance depend on neither the channel nor N
    return config.replace(distance=0.0, N=1.0, d0=None, output=None, scan=(0.0, 0.0, 1.0), workers=1)


def analyze(config: RunConfig, distance: float | None = None) -> KeyRateReport:
    """Key length, efficiency and throughput at one distance."""
    source = config.source()
    channel = config.channel(distance)
    det = config.detector()
    probe = expected_counts(config.N, config.p_X, source, channel, det)
    grid_X, grid_P = grids_for(config, probe.n_X)

    if config.d_model == "mc":
        d_model = _mc_distance(_cache_key(config), grid_P)
    else:
        d_model = float(config.d_model)
    counts = expected_counts(config.N, config.p_X, source, channel, det, d_model=d_model)

    joints = {b: gaussian_joint(b, source) for b in Basis}
    q_X = tail_mass(grid_X, joints[grid_X.basis])
    q_P = tail_mass(grid_P, joints[grid_P.basis])
    n_X = max(counts.n_X, 1.0)
    g = lambda q: -math.expm1(n_X * math.log1p(-q))
    budget = EpsilonBudget(config.eps_s, config.eps_c, math.sqrt(2 * g(q_X)), math.sqrt(2 * g(q_P)))

    bounds = estimate_bounds(counts, source, budget.eps_2, grid_P.M, k=config.anchor_intensity - 1)
    H_A, I_AB = _key_entropies(_cache_key(config), grid_X)
    l_EC = reconciliation_leakage(counts.n_X, H_A, I_AB, config.beta)
    report = key_length(counts, bounds, (grid_X, grid_P), budget, config.d0, l_EC, config.overlap_method)

    time_grid = grid_X if grid_X.basis is Basis.TIME else grid_P
    report = throughput(report, time_grid.Delta, config.N)
    details = {
        "distance_km": channel.distance,
        "d_model": d_model,
        "H_A": H_A,
        "I_AB": I_AB,
        "l_EC": l_EC,
        "Delta_X": grid_X.Delta,
        "Delta_P": grid_P.Delta,
        "eps_prime": budget.eps_prime,
        "eps_dprime": budget.eps_dprime,
        "nu": budget.nu,
    }
    return dataclasses.replace(report, details=details)


def scan(config: RunConfig) -> list[KeyRateReport]:
    """Evaluate every distance of ``config.scan``; results are in distance order."""
    distances = config.distances()
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(lambda L: analyze(config, L), distances))
    return [analyze(config, L) for L in distances]


def frame_requirements(config: RunConfig, distance: float | None = None) -> tuple[float, float]:
    """Minimum frame time (ns) and one-sided frequency cutoff (rad/ns) at a distance."""
    source = config.source()
    counts = expected_counts(config.N, config.p_X, source, config.channel(distance), config.detector())
    V_t = gaussian_joint(Basis.TIME, source).var_A
    V_w = gaussian_joint(Basis.FREQ, source).var_A
    return cutoff_requirements(V_t, V_w, max(counts.n_X, 1.0), config.eps_s)
