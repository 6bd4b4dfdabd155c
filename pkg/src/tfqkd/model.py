"""
Physical model of the source, fibre channel and detectors.

Produces the expected sifted coincidence counts per pump intensity and the
Gaussian second moments of Alice's and Bob's arrival-time and frequency
records for an SPDC photon-pair source.

Units: times in ns, angular frequencies in rad/ns, distances in km.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .exceptions import ConfigError, UndefinedInputError

__all__ = [
    "Basis",
    "SourceSpec",
    "ChannelSpec",
    "DetectorSpec",
    "GaussianJoint",
    "ObservedCounts",
    "transmission",
    "poisson_photon_prob",
    "tau_n",
    "intensity_given_n",
    "coincidence_prob",
    "coincidence_prob_series",
    "expected_counts",
    "gaussian_joint",
]

DEFAULT_LOSS_EXPONENT = 0.02


class Basis(str, enum.Enum):
    TIME = "time"
    FREQ = "freq"

    @classmethod
    def parse(cls, value) -> "Basis":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key in ("t", "time"):
            return cls.TIME
        if key in ("f", "freq", "frequency", "w", "omega"):
            return cls.FREQ
        raise ConfigError(f"unknown basis {value!r} (expected 'time' or 'freq')")

    @property
    def other(self) -> "Basis":
        return Basis.FREQ if self is Basis.TIME else Basis.TIME


@dataclass(frozen=True)
class SourceSpec:
    """SPDC source with a three-intensity decoy ensemble.

    Attributes
    ----------
    sigma_coh : float
        Pump coherence time (ns).
    sigma_cor : float
        Photon correlation time (ns).
    mu : tuple of float
        Mean photon numbers ``(mu1, mu2, mu3)`` with ``mu1 > mu2 + mu3`` and
        ``mu2 > mu3``.
    p_mu : tuple of float
        Probability of choosing each intensity.
    """

    sigma_coh: float = 0.5
    sigma_cor: float = 0.02
    mu: tuple = (0.2, 0.1, 0.01)
    p_mu: tuple = (0.7, 0.2, 0.1)

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        object.__setattr__(self, "p_mu", tuple(float(p) for p in self.p_mu))
        problems = self.violations()
        if problems:
            raise ConfigError(problems)

    def violations(self) -> list[str]:
        out = []
        if not (self.sigma_coh > 0 and self.sigma_cor > 0):
            out.append("sigma_coh and sigma_cor must be positive")
        elif not self.sigma_coh > self.sigma_cor:
            out.append("sigma_coh must exceed sigma_cor")
        if len(self.mu) != 3 or len(self.p_mu) != 3:
            out.append("exactly three intensities and three probabilities are required")
            return out
        mu1, mu2, mu3 = self.mu
        if min(self.mu) <= 0:
            out.append("intensities must be positive")
        if not mu1 > mu2 + mu3:
            out.append(f"intensity ordering violates mu1 > mu2 + mu3 ({mu1} <= {mu2} + {mu3})")
        if not mu2 > mu3:
            out.append(f"intensity ordering violates mu2 > mu3 ({mu2} <= {mu3})")
        if not all(0 < p < 1 for p in self.p_mu):
            out.append("intensity probabilities must lie in (0, 1)")
        if abs(sum(self.p_mu) - 1.0) > 1e-9:
            out.append(f"intensity probabilities must sum to 1 (got {sum(self.p_mu)})")
        return out

    @classmethod
    def degenerate(cls, mu: float, **kw) -> "SourceSpec":
        """Single-intensity ensemble; skips the decoy-ordering checks.

        Only meaningful for the photon-statistics helpers, never for decoy bounds.
        """
        obj = object.__new__(cls)
        object.__setattr__(obj, "sigma_coh", kw.get("sigma_coh", 0.5))
        object.__setattr__(obj, "sigma_cor", kw.get("sigma_cor", 0.02))
        object.__setattr__(obj, "mu", (float(mu), 0.0, 0.0))
        object.__setattr__(obj, "p_mu", (1.0, 0.0, 0.0))
        return obj


@dataclass(frozen=True)
class ChannelSpec:
    distance: float = 0.0
    loss_exponent: float = DEFAULT_LOSS_EXPONENT

    def __post_init__(self):
        if not self.distance >= 0:
            raise ConfigError(f"distance must be non-negative (got {self.distance})")
        if not self.loss_exponent >= 0:
            raise ConfigError("loss_exponent must be non-negative")


@dataclass(frozen=True)
class DetectorSpec:
    dark_prob: float = 6e-7
    eta_A: float = 0.93
    eta_B: float = 0.93

    def __post_init__(self):
        bad = []
        if not 0 <= self.dark_prob < 1:
            bad.append("dark_prob must lie in [0, 1)")
        if not (0 < self.eta_A <= 1 and 0 < self.eta_B <= 1):
            bad.append("detector efficiencies must lie in (0, 1]")
        if bad:
            raise ConfigError(bad)


@dataclass(frozen=True)
class GaussianJoint:
    """Zero-mean bivariate normal of Alice's and Bob's outcomes in one basis."""

    basis: Basis
    var_A: float
    var_B: float
    cov_AB: float

    def __post_init__(self):
        if not (self.var_A > 0 and self.var_B > 0):
            raise ConfigError("variances must be positive")
        if not abs(self.cov_AB) <= math.sqrt(self.var_A * self.var_B):
            raise ConfigError("covariance exceeds the Cauchy-Schwarz limit")

    @property
    def rho(self) -> float:
        return self.cov_AB / math.sqrt(self.var_A * self.var_B)

    @property
    def covariance(self) -> np.ndarray:
        return np.array([[self.var_A, self.cov_AB], [self.cov_AB, self.var_B]])

    @property
    def positive_definite(self) -> bool:
        return self.var_A * self.var_B - self.cov_AB**2 > 0


@dataclass(frozen=True)
class ObservedCounts:
    """Sifted counts per intensity; index k runs over ``(mu1, mu2, mu3)``.

    Values are real-valued expectations in analytic mode and integers when
    drawn by :func:`tfqkd.mcsim.sample_counts`.
    """

    N: float
    n_X_mu: np.ndarray
    n_P_mu: np.ndarray
    m_P_mu: np.ndarray = field(default=None)

    def __post_init__(self):
        for name in ("n_X_mu", "n_P_mu"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        m = self.m_P_mu
        m = np.zeros_like(self.n_P_mu) if m is None else np.asarray(m, dtype=float)
        object.__setattr__(self, "m_P_mu", m)
        for arr in (self.n_X_mu, self.n_P_mu, self.m_P_mu):
            if arr.shape != (3,):
                raise ConfigError("counts must have one entry per intensity")
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise ConfigError("counts must be finite and non-negative")

    @property
    def n_X(self) -> float:
        return float(self.n_X_mu.sum())

    @property
    def n_P(self) -> float:
        return float(self.n_P_mu.sum())

    @property
    def m_P(self) -> float:
        return float(self.m_P_mu.sum())

    @property
    def n_mu(self) -> np.ndarray:
        """Detections in both bases per intensity."""
        return self.n_X_mu + self.n_P_mu

    def consistent_with(self, M_P: int) -> bool:
        return bool(np.all(self.m_P_mu <= self.n_P_mu * (M_P - 1) + 1e-9))

    def basis_counts(self, which: str) -> np.ndarray:
        if which == "X":
            return self.n_X_mu
        if which == "P":
            return self.n_P_mu
        raise ValueError(f"which must be 'X' or 'P', not {which!r}")


def transmission(channel: ChannelSpec) -> float:
    """Fibre transmission ``10**(-loss_exponent * L)``."""
    if channel.distance < 0:
        raise ConfigError("distance must be non-negative")
    return 10.0 ** (-channel.loss_exponent * channel.distance)


def poisson_photon_prob(n: int, mu: float) -> float:
    if n < 0 or mu < 0:
        raise ValueError("n and mu must be non-negative")
    if mu == 0:
        return 1.0 if n == 0 else 0.0
    return math.exp(-mu + n * math.log(mu) - gammaln(n + 1))


def tau_n(n: int, source: SourceSpec) -> float:
    """Total probability that the source emits ``n`` photons."""
    return sum(p * poisson_photon_prob(n, m) for p, m in zip(source.p_mu, source.mu) if p > 0)


def intensity_given_n(k: int, n: int, source: SourceSpec) -> float:
    """Posterior probability of intensity ``k`` given an ``n``-photon emission."""
    t = tau_n(n, source)
    if t <= 0:
        raise UndefinedInputError(f"tau_{n} vanishes; p(mu_k | n) is undefined")
    return source.p_mu[k] * poisson_photon_prob(n, source.mu[k]) / t


def coincidence_prob(mu: float, channel: ChannelSpec, det: DetectorSpec) -> float:
    """Probability that both parties register at least one click.

    Closed form of the Poisson-averaged threshold-detector coincidence,
    dark counts included.
    """
    T = transmission(channel)
    a = 1.0 - det.dark_prob
    eA, eB = det.eta_A, det.eta_B * T
    return (
        1.0
        - a * math.exp(-mu * eA)
        - a * math.exp(-mu * eB)
        + a * a * math.exp(-mu * (eA + eB - eA * eB))
    )


def coincidence_prob_series(mu: float, channel: ChannelSpec, det: DetectorSpec, n_max: int = 50) -> float:
    """Photon-number sum for the coincidence probability, truncated at ``n_max``."""
    T = transmission(channel)
    a = 1.0 - det.dark_prob
    total = 0.0
    for n in range(n_max + 1):
        p = poisson_photon_prob(n, mu)
        total += p * (1 - a * (1 - det.eta_A) ** n) * (1 - a * (1 - det.eta_B * T) ** n)
    return total


def expected_counts(
    N: float,
    p_X: float,
    source: SourceSpec,
    channel: ChannelSpec,
    det: DetectorSpec,
    d_model: float = 0.0,
) -> ObservedCounts:
    """Expected sifted counts after ``N`` channel uses.

    ``d_model`` is the average bin distance in the check basis; the error
    count of every intensity is ``d_model * n_P_mu[k]``.
    """
    if not N > 0:
        raise ConfigError("N must be positive")
    if not 0 < p_X <= 1:
        raise ConfigError("p_X must lie in (0, 1]")
    kappa = np.array([coincidence_prob(m, channel, det) for m in source.mu])
    p_mu = np.asarray(source.p_mu)
    n_X = p_X**2 * p_mu * kappa * N
    n_P = (1 - p_X) ** 2 * p_mu * kappa * N
    return ObservedCounts(N=N, n_X_mu=n_X, n_P_mu=n_P, m_P_mu=d_model * n_P)


def gaussian_joint(basis, source: SourceSpec) -> GaussianJoint:
    """Second moments of the SPDC two-photon wavefunction in one basis.

    The frequency covariance keeps the positive sign, i.e. Bob's detuning
    axis is taken as mirrored so both records are positively correlated.
    """
    basis = Basis.parse(basis)
    s_coh2 = source.sigma_coh**2
    s_cor2 = source.sigma_cor**2
    if basis is Basis.TIME:
        var = s_coh2 + s_cor2 / 4
        cov = s_coh2 - s_cor2 / 4
    else:
        var = (1 / s_coh2 + 4 / s_cor2) / 16
        cov = (4 * s_coh2 - s_cor2) / (16 * s_coh2 * s_cor2)
    return GaussianJoint(basis=basis, var_A=var, var_B=var, cov_AB=cov)
