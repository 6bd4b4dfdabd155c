"""
Finite-size decoy-state estimates.

Hoeffding-corrected one-sided bounds on the vacuum and single-photon
contributions to the sifted strings, on the total number of single-photon
detections across both bases, and on the single-photon average bin distance
in the check basis.

Every bound accepts ``eps_2 = 1``, which switches the fluctuation terms off
and leaves the asymptotic decoy algebra.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import KeyAbort
from .model import ObservedCounts, SourceSpec, intensity_given_n, tau_n

__all__ = [
    "DecoyBounds",
    "hoeffding_delta",
    "hoeffding_delta_errors",
    "vacuum_lower_bound",
    "single_photon_lower_bound",
    "total_single_photon_upper_bound",
    "single_photon_distance_bound",
    "estimate_bounds",
    "FAILURE_EVENTS",
]

# three intensities x two bases, each a two-sided Hoeffding event
FAILURE_EVENTS = 12


@dataclass(frozen=True)
class DecoyBounds:
    n_X0_lo: float
    n_X1_lo: float
    n_P0_lo: float
    n_P1_lo: float
    n_P1_hi: float
    N1_hi: float
    d_P1_hi: float
    eps_2: float
    clamped: tuple = field(default=())

    @property
    def failure_budget(self) -> float:
        return FAILURE_EVENTS * self.eps_2


def _check_eps(eps_2):
    if not 0 < eps_2 <= 1:
        raise ValueError("eps_2 must lie in (0, 1]")


def hoeffding_delta(n: float, eps_2: float) -> float:
    """Hoeffding deviation ``sqrt(n/2 * ln(1/eps_2))``."""
    _check_eps(eps_2)
    if n < 0:
        raise ValueError("n must be non-negative")
    return math.sqrt(n / 2 * math.log(1 / eps_2))


def hoeffding_delta_errors(m_P: float, M_P: int, eps_2: float) -> float:
    """Deviation for error counts whose entries range over ``M_P`` labels."""
    return M_P * hoeffding_delta(m_P, eps_2)


def _shifted(n, lam):
    return n - lam, n + lam


def _vacuum_raw(n, lam, source):
    (_, mu2, mu3), (_, p2, p3) = source.mu, source.p_mu
    lo, hi = _shifted(n, lam)
    return tau_n(0, source) / (mu2 - mu3) * (math.exp(mu3) * mu2 * lo[2] / p3 - math.exp(mu2) * mu3 * hi[1] / p2)


def _single_raw(n, lam, source, n0_lo):
    (mu1, mu2, mu3), (p1, p2, p3) = source.mu, source.p_mu
    lo, hi = _shifted(n, lam)
    t0, t1 = tau_n(0, source), tau_n(1, source)
    sq = mu2**2 - mu3**2
    bracket = (
        math.exp(mu2) / p2 * lo[1]
        - math.exp(mu3) / p3 * hi[2]
        + sq / mu1**2 * (n0_lo / t0 - math.exp(mu1) / p1 * hi[0])
    )
    return mu1 * t1 / (mu1 * (mu2 - mu3) - sq) * bracket


def _basis(counts: ObservedCounts, basis: str) -> np.ndarray:
    return counts.basis_counts(basis)


def vacuum_lower_bound(counts: ObservedCounts, basis: str, source: SourceSpec, eps_2: float) -> float:
    """Lower bound on vacuum-emission coincidences in basis ``'X'`` or ``'P'``.

    Holds except with probability ``4 eps_2``; clamped at zero.
    """
    n = _basis(counts, basis)
    lam = hoeffding_delta(n.sum(), eps_2)
    return float(np.clip(_vacuum_raw(n, lam, source), 0.0, n.sum()))


def single_photon_lower_bound(
    counts: ObservedCounts, basis: str, source: SourceSpec, eps_2: float, n0_lo: float
) -> float:
    """Lower bound on single-photon coincidences; fails with probability ``<= 6 eps_2``."""
    n = _basis(counts, basis)
    lam = hoeffding_delta(n.sum(), eps_2)
    return float(np.clip(_single_raw(n, lam, source, n0_lo), 0.0, n.sum()))


def total_single_photon_upper_bound(counts: ObservedCounts, source: SourceSpec, eps_2: float) -> float:
    """Upper bound on single-photon detections summed over both bases."""
    (_, mu2, mu3), (_, p2, p3) = source.mu, source.p_mu
    n = counts.n_mu
    lam = hoeffding_delta(n.sum(), eps_2)
    raw = tau_n(1, source) / (mu2 - mu3) * (
        math.exp(mu2) * (n[1] + lam) / p2 - math.exp(mu3) * (n[2] - lam) / p3
    )
    return float(np.clip(raw, 0.0, n.sum()))


def single_photon_distance_bound(
    counts: ObservedCounts,
    source: SourceSpec,
    eps_2: float,
    n_P1_lo: float,
    M_P: int,
    k: int = 0,
) -> float:
    """Upper bound on the check-basis average distance of single-photon events.

    Anchored on the error count of intensity ``k`` (0-based). Raises
    :class:`KeyAbort` when no single-photon check events are certified.
    """
    if not n_P1_lo > 0:
        raise KeyAbort(KeyAbort.NO_SINGLE_PHOTON_BOUND, "single-photon check-basis lower bound is zero")
    lam_err = hoeffding_delta_errors(counts.m_P, M_P, eps_2)
    m_hi = counts.m_P_mu[k] + lam_err
    return float(m_hi / (intensity_given_n(k, 1, source) * n_P1_lo))


def estimate_bounds(
    counts: ObservedCounts,
    source: SourceSpec,
    eps_2: float,
    M_P: int,
    k: int = 0,
) -> DecoyBounds:
    """All decoy bounds needed by the key length.

    ``d_P1_hi`` is ``inf`` when the single-photon check bound vanishes; the
    caller decides whether that aborts.
    """
    clamped = []
    values = {}
    for b in ("X", "P"):
        n = _basis(counts, b)
        lam = hoeffding_delta(n.sum(), eps_2)
        raw0 = _vacuum_raw(n, lam, source)
        n0 = vacuum_lower_bound(counts, b, source, eps_2)
        raw1 = _single_raw(n, lam, source, n0)
        n1 = single_photon_lower_bound(counts, b, source, eps_2, n0)
        if n0 != raw0:
            clamped.append(f"n_{b}0_lo")
        if n1 != raw1:
            clamped.append(f"n_{b}1_lo")
        values[b] = (n0, n1)
    N1_hi = total_single_photon_upper_bound(counts, source, eps_2)
    n_X1_lo = values["X"][1]
    n_P1_lo = values["P"][1]
    n_P1_hi = max(N1_hi - n_X1_lo, 0.0)
    try:
        d_hi = single_photon_distance_bound(counts, source, eps_2, n_P1_lo, M_P, k)
    except KeyAbort:
        d_hi = math.inf
    return DecoyBounds(
        n_X0_lo=values["X"][0],
        n_X1_lo=n_X1_lo,
        n_P0_lo=values["P"][0],
        n_P1_lo=n_P1_lo,
        n_P1_hi=n_P1_hi,
        N1_hi=N1_hi,
        d_P1_hi=d_hi,
        eps_2=eps_2,
        clamped=tuple(clamped),
    )
