"""
Binned conjugate measurements and the quantities entering the uncertainty
relation: the overlap constant of two bin widths, Gaussian tail masses
outside the cutoff, and the smoothing corrections they induce.

The overlap of a time bin of width ``delta_X`` with a frequency bin of width
``delta_P`` is the top eigenvalue ``lambda_0`` of the time-limiting /
band-limiting operator with bandwidth parameter ``u = delta_X*delta_P/4``:

    c = (delta_X*delta_P / 2pi) * S_0(1, u)**2  =  lambda_0(u)

where ``S_0`` is the radial prolate spheroidal function of the first kind of
order zero (Flammer normalisation). Three evaluation routes exist:

* ``"prolate"``: Legendre expansion of the angular function (Bouwkamp
  tridiagonal eigenproblem) followed by the spherical-Bessel series for the
  radial function. Default.
* ``"kernel"``: Nystrom discretisation of the sinc kernel on [-1, 1]; an
  independent oracle for the first route.
* ``"small-u"``: ``(2u/pi)(1 - u**2/9)``, accurate only for ``u << 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import erf, erfc, erfcinv, spherical_jn

from .exceptions import ConfigError, GridTooCoarseError
from .model import Basis, GaussianJoint

__all__ = [
    "MeasurementGrid",
    "OverlapConstant",
    "radial_prolate_s0",
    "prolate_lambda0",
    "kernel_lambda0",
    "small_u_lambda0",
    "overlap_c",
    "tail_prob",
    "tail_mass",
    "excess_prob_g",
    "cutoff_from_budget",
    "smoothing_eps",
]


@dataclass(frozen=True)
class MeasurementGrid:
    """Bins of width ``delta`` with cutoff ``+-Delta`` in one basis.

    Interior edges sit at ``-Delta + k*delta`` for ``k = 1..M-1``; the first
    and last bins extend to infinity, so there are ``M = 2*Delta/delta + 1``
    labels in total.
    """

    basis: Basis
    delta: float
    Delta: float

    def __post_init__(self):
        object.__setattr__(self, "basis", Basis.parse(self.basis))
        if not (self.delta > 0 and self.Delta > 0):
            raise ConfigError("bin width and cutoff must be positive")
        ratio = 2 * self.Delta / self.delta
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ConfigError(f"2*Delta/delta = {ratio} is not an integer; use MeasurementGrid.covering")

    @classmethod
    def covering(cls, basis, delta: float, Delta_min: float) -> "MeasurementGrid":
        """Smallest grid with odd ``M`` whose cutoff is at least ``Delta_min``."""
        steps = max(2, math.ceil(2 * Delta_min / delta - 1e-12))
        if steps % 2:
            steps += 1
        return cls(basis, delta, steps * delta / 2)

    @property
    def M(self) -> int:
        return int(round(2 * self.Delta / self.delta)) + 1

    @property
    def edges(self) -> np.ndarray:
        """Interior bin edges, ``M - 1`` of them."""
        return -self.Delta + self.delta * np.arange(1, self.M)

    def labels(self, values) -> np.ndarray:
        """Zero-based bin label of each value (right-closed intervals)."""
        return np.searchsorted(self.edges, np.asarray(values), side="left")


@dataclass(frozen=True)
class OverlapConstant:
    c: float
    u: float
    method: str

    @property
    def bits(self) -> float:
        """``log2(1/c)``, the certified entropy per single-photon signal."""
        return -math.log2(self.c)


def _bouwkamp_coefficients(u: float, size: int):
    r = 2 * np.arange(size, dtype=float)
    c2 = u * u
    diag = r * (r + 1) + c2 * (2 * r * (r + 1) - 1) / ((2 * r - 1) * (2 * r + 3))
    upper = (r[:-1] + 2) * (r[:-1] + 1) * c2 / ((2 * r[:-1] + 3) * (2 * r[:-1] + 5))
    rl = r[1:]
    lower = rl * (rl - 1) * c2 / ((2 * rl - 3) * (2 * rl - 1))
    mat = np.diag(diag) + np.diag(upper, 1) + np.diag(lower, -1)
    vals, vecs = np.linalg.eig(mat)
    i = int(np.argmin(vals.real))
    return vals[i].real, vecs[:, i].real


def radial_prolate_s0(u: float) -> float:
    """Radial prolate spheroidal function ``R_00^(1)(u, 1)`` (Flammer normalisation)."""
    if u <= 0:
        raise ValueError("u must be positive")
    size = max(24, int(2 * u) + 24)
    _, d = _bouwkamp_coefficients(u, size)
    r = 2 * np.arange(size)
    signs = np.where(np.arange(size) % 2, -1.0, 1.0)
    return float(np.sum(signs * d * spherical_jn(r, u)) / np.sum(d))


# the Bessel series cancels badly beyond this; lambda_0 is within 1e-6 of one there anyway
_PROLATE_U_MAX = 8.0


def prolate_lambda0(u: float) -> float:
    if u > _PROLATE_U_MAX:
        return kernel_lambda0(u)
    return 2 * u / math.pi * radial_prolate_s0(u) ** 2


@lru_cache(maxsize=256)
def _kernel_matrix_eig(u: float, n: int) -> float:
    x, w = leggauss(n)
    diff = x[:, None] - x[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        kern = np.where(diff == 0, u / math.pi, np.sin(u * diff) / (math.pi * diff))
    sw = np.sqrt(w)
    return float(np.linalg.eigvalsh(sw[:, None] * kern * sw[None, :])[-1])


def kernel_lambda0(u: float, n: int | None = None) -> float:
    """Largest eigenvalue of the sinc kernel ``sin(u(x-y))/(pi(x-y))`` on [-1, 1].

    Equal to the squared operator norm of (time-interval projector) x
    (frequency-interval projector). Gauss-Legendre Nystrom with ``n`` nodes,
    by default enough to resolve the kernel's oscillation.
    """
    if u <= 0:
        raise ValueError("u must be positive")
    if n is None:
        n = max(96, int(2 * u) + 64)
    # exact value never exceeds one; rounding can
    return min(_kernel_matrix_eig(float(u), int(n)), 1.0)


def small_u_lambda0(u: float) -> float:
    return 2 * u / math.pi * (1 - u * u / 9)


_METHODS = {"prolate": prolate_lambda0, "kernel": kernel_lambda0, "small-u": small_u_lambda0}


def overlap_c(delta_X: float, delta_P: float, method: str = "prolate") -> OverlapConstant:
    """Overlap constant of two conjugate bin widths.

    Raises
    ------
    GridTooCoarseError
        If the bins are so wide that ``c >= 1`` and no entropy is certified.
    """
    if not (delta_X > 0 and delta_P > 0):
        raise ConfigError("bin widths must be positive")
    try:
        fn = _METHODS[method]
    except KeyError:
        raise ConfigError(f"unknown overlap method {method!r}; choose from {sorted(_METHODS)}") from None
    u = delta_X * delta_P / 4
    c = fn(u)
    if not 0 < c < 1:
        raise GridTooCoarseError(f"overlap c = {c:.6g} for delta_X*delta_P = {4 * u:.6g}; bins too coarse")
    return OverlapConstant(c=c, u=u, method=method)


def _marginal_var(joint: GaussianJoint | float) -> float:
    return joint.var_A if isinstance(joint, GaussianJoint) else float(joint)


def tail_prob(grid: MeasurementGrid, joint: GaussianJoint | float) -> float:
    """Probability that Alice's outcome falls inside ``[-Delta, Delta]``."""
    return float(erf(grid.Delta / math.sqrt(2 * _marginal_var(joint))))


def tail_mass(grid: MeasurementGrid, joint: GaussianJoint | float) -> float:
    """``1 - tail_prob`` evaluated without cancellation."""
    return float(erfc(grid.Delta / math.sqrt(2 * _marginal_var(joint))))


def excess_prob_g(p_Delta: float, n_X: float, q: float | None = None) -> float:
    """Probability that any of ``n_X`` outcomes lands outside the cutoff.

    ``1 - p_Delta**n_X``. Pass ``q = 1 - p_Delta`` when it is known more
    accurately than ``p_Delta`` itself (always the case deep in the tail).
    """
    if q is None:
        if not 0 < p_Delta <= 1:
            raise ValueError("p_Delta must lie in (0, 1]")
        q = 1.0 - p_Delta
    if q <= 0:
        return 0.0
    return float(-np.expm1(n_X * np.log1p(-q)))


def cutoff_from_budget(V: float, n_X: float, eps: float) -> float:
    """Smallest cutoff with ``sqrt(2 g) <= eps`` for a variance-``V`` marginal."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if n_X < 1:
        raise ValueError("n_X must be at least 1")
    q = -math.expm1(math.log1p(-eps * eps / 2) / n_X)
    return math.sqrt(2 * V) * float(erfcinv(q))


def smoothing_eps(
    p_Delta_X: float,
    p_Delta_P: float,
    n_X: float,
    p_pass: float = 1.0,
    q_X: float | None = None,
    q_P: float | None = None,
) -> tuple[float, float]:
    """Smoothing corrections ``(eps', eps'')`` from the two tail masses.

    With the default ``p_pass = 1`` these are the pass-probability-free values
    used in the final key length.
    """
    gX = excess_prob_g(p_Delta_X, n_X, q_X)
    gP = excess_prob_g(p_Delta_P, n_X, q_P)
    return math.sqrt(2 * gX / p_pass), math.sqrt(2 * gP / p_pass)
