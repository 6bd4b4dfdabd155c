"""
Secret-key length of the decoy-state time-frequency protocol with all
finite-size corrections, plus the derived efficiency and throughput figures.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

from .decoy import FAILURE_EVENTS, DecoyBounds
from .exceptions import ConfigError, KeyAbort
from .model import ObservedCounts
from .uncertainty import MeasurementGrid, cutoff_from_budget, overlap_c

__all__ = [
    "EPS_DIVISOR",
    "EpsilonBudget",
    "KeyRateReport",
    "gamma",
    "log2_gamma",
    "nu_lower_bound",
    "serfling_term",
    "serfling_term_general",
    "key_length",
    "throughput",
    "cutoff_requirements",
]

# eps_1 = eps_2 = alpha_2 = alpha_3 = eps_s / 21
EPS_DIVISOR = 21


@dataclass(frozen=True)
class EpsilonBudget:
    """Security parameters and the smoothing corrections from the cutoffs.

    ``eps_prime`` and ``eps_dprime`` are ``sqrt(2 g)`` for the key and check
    basis tails, with the pass probability relaxed to one.
    """

    eps_s: float
    eps_c: float
    eps_prime: float = 0.0
    eps_dprime: float = 0.0

    def __post_init__(self):
        if not (0 < self.eps_s < 1 and 0 < self.eps_c < 1):
            raise ConfigError("eps_s and eps_c must lie in (0, 1)")
        if self.eps_prime < 0 or self.eps_dprime < 0:
            raise ConfigError("smoothing corrections must be non-negative")

    @property
    def eps_1(self) -> float:
        return self.eps_s / EPS_DIVISOR

    eps_2 = alpha_2 = alpha_3 = eps_1

    @property
    def eps_fail(self) -> float:
        return FAILURE_EVENTS * self.eps_2

    @property
    def nu(self) -> float:
        """Smoothing left for the max-entropy bound; must be positive."""
        return self.eps_1 - self.eps_prime - self.eps_dprime

    @property
    def feasible(self) -> bool:
        return self.nu > 0


@dataclass(frozen=True)
class KeyRateReport:
    l: int
    pre_floor: float
    N: float
    n_X: float
    components: dict = field(default_factory=dict)
    bounds: DecoyBounds | None = None
    c: float = math.nan
    M_X: int = 0
    M_P: int = 0
    d_0: float = math.nan
    c_prime: float = math.nan
    frame_time: float = math.nan
    max_clock: float = math.nan
    bits_per_second: float = math.nan
    aborted: str | None = None
    abort_detail: str = ""
    details: dict = field(default_factory=dict)

    @property
    def rate(self) -> float:
        return self.l / self.N

    @property
    def pie(self) -> float:
        """Secret bits per key-basis coincidence."""
        return self.l / self.n_X if self.n_X > 0 else 0.0

    @property
    def positive_key(self) -> bool:
        return self.l > 0


def log2_gamma(x: float) -> float:
    """``log2`` of the max-entropy growth function, stable near ``x = 0``."""
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 0.0
    s = math.sqrt(1 + x * x)
    # x / (s - 1) == (s + 1) / x; split log so tiny x cannot overflow
    return (math.asinh(x) + x * (math.log1p(s) - math.log(x))) / math.log(2)


def gamma(x: float) -> float:
    """``(x + sqrt(1+x^2)) * (x / (sqrt(1+x^2) - 1))**x`` with ``gamma(0) = 1``."""
    return 2.0 ** log2_gamma(x)


def nu_lower_bound(eps_s, eps_1, eps_fail, alpha_2, alpha_3, eps_prime, eps_dprime) -> float:
    """Lower bound on ``sqrt(p_pass) * nu`` for arbitrary parameter splits."""
    return 0.5 * ((eps_s - eps_fail - eps_1) / 2 - (alpha_2 + alpha_3)) - eps_prime - eps_dprime


def _sampling_factor(bounds: DecoyBounds, M_P: int) -> float:
    if not (bounds.n_X1_lo > 0 and bounds.n_P1_lo > 0):
        raise KeyAbort(KeyAbort.NO_SINGLE_PHOTON_BOUND, "single-photon lower bound is zero")
    return M_P * math.sqrt(bounds.N1_hi * (bounds.n_P1_hi + 1) / (bounds.n_X1_lo * bounds.n_P1_lo**2))


def serfling_term_general(bounds: DecoyBounds, M_P: int, nu_scaled: float) -> float:
    """Statistical margin on the counterfactual distance for a given ``sqrt(p_pass) nu``."""
    if not nu_scaled > 0:
        raise KeyAbort(KeyAbort.INFEASIBLE_CUTOFF, f"smoothing budget {nu_scaled:.3g} is not positive")
    return _sampling_factor(bounds, M_P) * math.sqrt(math.log(1 / nu_scaled))


def serfling_term(bounds: DecoyBounds, M_P: int, budget: EpsilonBudget) -> float:
    """Margin ``C'`` added to the distance threshold in the max-entropy bound."""
    if not budget.feasible:
        raise KeyAbort(
            KeyAbort.INFEASIBLE_CUTOFF,
            f"tail corrections {budget.eps_prime:.3g} + {budget.eps_dprime:.3g} exhaust eps_s/21 = {budget.eps_1:.3g}",
        )
    return serfling_term_general(bounds, M_P, budget.nu)


def _aborted(counts, exc, **kw):
    return KeyRateReport(
        l=0, pre_floor=math.nan, N=counts.N, n_X=counts.n_X, aborted=exc.reason, abort_detail=exc.detail, **kw
    )


def key_length(
    counts: ObservedCounts,
    bounds: DecoyBounds,
    grids: tuple[MeasurementGrid, MeasurementGrid],
    budget: EpsilonBudget,
    d_0: float | None,
    l_EC: float,
    overlap_method: str = "prolate",
) -> KeyRateReport:
    """Key length for the given bounds; protocol aborts are reported, not raised.

    ``grids`` is ``(key_grid, check_grid)``. ``d_0=None`` uses the tightest
    non-aborting threshold, ``d_P1_hi`` itself.
    """
    grid_X, grid_P = grids
    M_X, M_P = grid_X.M, grid_P.M
    c = overlap_c(grid_X.delta, grid_P.delta, overlap_method).c
    common = dict(bounds=bounds, c=c, M_X=M_X, M_P=M_P)
    d_hi = bounds.d_P1_hi
    d_0 = d_hi if d_0 is None else d_0
    try:
        if not math.isfinite(d_hi):
            raise KeyAbort(KeyAbort.NO_SINGLE_PHOTON_BOUND, "single-photon check-basis lower bound is zero")
        if d_hi > d_0:
            raise KeyAbort(
                KeyAbort.DISTANCE_THRESHOLD_EXCEEDED, f"d+_P1 = {d_hi:.6g} exceeds threshold d0 = {d_0:.6g}"
            )
        c_prime = serfling_term(bounds, M_P, budget)
    except KeyAbort as exc:
        return _aborted(counts, exc, d_0=d_0, **common)

    n1, n0 = bounds.n_X1_lo, bounds.n_X0_lo
    components = {
        "uncertainty": -n1 * math.log2(c),
        "gamma": -n1 * log2_gamma(d_0 + c_prime),
        "eps_overhead": -4 * math.log2(EPS_DIVISOR / budget.eps_s),
        "vacuum": n0 * math.log2(M_X),
        "leakage": -l_EC,
        "correctness": -math.log2(1 / (budget.eps_c * budget.eps_s)),
    }
    pre = math.fsum(components.values())
    return KeyRateReport(
        l=max(0, math.floor(pre)),
        pre_floor=pre,
        N=counts.N,
        n_X=counts.n_X,
        components=components,
        d_0=d_0,
        c_prime=c_prime,
        **common,
    )


def throughput(report: KeyRateReport, Delta_t: float, N: float | None = None) -> KeyRateReport:
    """Attach frame time ``2*Delta_t`` (ns), the clock limit (Hz) and bits/s."""
    N = report.N if N is None else N
    frame = 2 * Delta_t
    clock = 1e9 / frame
    return dataclasses.replace(report, frame_time=frame, max_clock=clock, bits_per_second=report.l / N * clock)


def cutoff_requirements(V_t: float, V_w: float, n_X: float, eps_s: float) -> tuple[float, float]:
    """Minimum frame time (ns) and one-sided frequency cutoff (rad/ns).

    Both tail terms get an equal share ``eps_s/42`` of the smoothing budget.
    """
    eps = eps_s / (2 * EPS_DIVISOR)
    return 2 * cutoff_from_budget(V_t, n_X, eps), cutoff_from_budget(V_w, n_X, eps)
