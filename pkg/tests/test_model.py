import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfqkd.exceptions import ConfigError, UndefinedInputError
from tfqkd.model import (
    Basis,
    ChannelSpec,
    DetectorSpec,
    GaussianJoint,
    ObservedCounts,
    SourceSpec,
    coincidence_prob,
    coincidence_prob_series,
    expected_counts,
    gaussian_joint,
    intensity_given_n,
    poisson_photon_prob,
    tau_n,
    transmission,
)

# 50-digit mpmath references
TAU0 = 0.85308399413669602
TAU1 = 0.13370910362538582
P_MU1_GIVEN_1 = 0.85725131889340879
KAPPA_02 = 0.15898632542350846


def test_photon_statistics_goldens(source):
    assert tau_n(0, source) == pytest.approx(TAU0, rel=1e-14)
    assert tau_n(1, source) == pytest.approx(TAU1, rel=1e-14)
    assert intensity_given_n(0, 1, source) == pytest.approx(P_MU1_GIVEN_1, rel=1e-14)


def test_tau_sums_to_one(source):
    assert math.fsum(tau_n(n, source) for n in range(60)) == pytest.approx(1.0, abs=1e-15)


def test_posterior_sums_to_one(source):
    for n in range(6):
        assert sum(intensity_given_n(k, n, source) for k in range(3)) == pytest.approx(1.0, rel=1e-13)


def test_posterior_undefined_when_tau_vanishes():
    degenerate = SourceSpec.degenerate(0.0)
    with pytest.raises(UndefinedInputError):
        intensity_given_n(0, 1, degenerate)


def test_poisson_zero_mean():
    assert poisson_photon_prob(0, 0.0) == 1.0
    assert poisson_photon_prob(3, 0.0) == 0.0


def test_coincidence_golden():
    k = coincidence_prob(0.2, ChannelSpec(0.0), DetectorSpec())
    assert k == pytest.approx(KAPPA_02, abs=1e-12)


def test_coincidence_no_light_is_dark_only():
    det = DetectorSpec(dark_prob=1e-3)
    assert coincidence_prob(0.0, ChannelSpec(10.0), det) == pytest.approx(1e-6, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    mu=st.floats(0, 1),
    loss=st.floats(0, 200),
    pd=st.floats(0, 1e-3),
    eta=st.floats(0.05, 1),
)
def test_coincidence_closed_form_matches_series(mu, loss, pd, eta):
    ch = ChannelSpec(loss)
    det = DetectorSpec(dark_prob=pd, eta_A=eta, eta_B=eta)
    assert abs(coincidence_prob(mu, ch, det) - coincidence_prob_series(mu, ch, det)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(L=st.floats(0, 300), dL=st.floats(0.1, 50))
def test_coincidence_decreases_with_distance(L, dL):
    det = DetectorSpec()
    assert coincidence_prob(0.2, ChannelSpec(L + dL), det) <= coincidence_prob(0.2, ChannelSpec(L), det)


def test_transmission():
    assert transmission(ChannelSpec(50.0)) == pytest.approx(0.1)
    assert transmission(ChannelSpec(0.0)) == 1.0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(mu=(0.1, 0.1, 0.01)),
        dict(mu=(0.2, 0.01, 0.1)),
        dict(p_mu=(0.5, 0.2, 0.2)),
        dict(sigma_coh=0.01, sigma_cor=0.02),
        dict(mu=(0.2, 0.1)),
    ],
)
def test_source_rejects_bad_ensembles(kwargs):
    with pytest.raises(ConfigError):
        SourceSpec(**kwargs)


def test_source_reports_every_violation():
    with pytest.raises(ConfigError) as info:
        SourceSpec(mu=(0.1, 0.1, 0.2), p_mu=(0.5, 0.2, 0.2))
    assert len(info.value.violations) >= 3


def test_gaussian_moments(source):
    t = gaussian_joint(Basis.TIME, source)
    assert (t.var_A, t.cov_AB) == pytest.approx((0.2501, 0.2499), rel=1e-14)
    f = gaussian_joint("freq", source)
    assert f.rho == pytest.approx(0.99920031987205118, rel=1e-14)
    assert t.positive_definite and f.positive_definite


def test_gaussian_joint_rejects_invalid_covariance():
    with pytest.raises(ConfigError):
        GaussianJoint("time", 1.0, 1.0, 1.5)


def test_expected_counts_basis_split(source):
    counts = expected_counts(1e10, 0.5, source, ChannelSpec(20.0), DetectorSpec(), d_model=0.1)
    np.testing.assert_allclose(counts.n_X_mu, counts.n_P_mu)
    np.testing.assert_allclose(counts.m_P_mu, 0.1 * counts.n_P_mu)
    assert counts.n_X == pytest.approx(counts.n_X_mu.sum())
    assert counts.consistent_with(M_P=3)


def test_observed_counts_validation():
    with pytest.raises(ConfigError):
        ObservedCounts(N=1, n_X_mu=[1, 2], n_P_mu=[1, 2, 3])
    with pytest.raises(ConfigError):
        ObservedCounts(N=1, n_X_mu=[1, -2, 3], n_P_mu=[1, 2, 3])


def test_basis_parse():
    assert Basis.parse("T") is Basis.TIME
    assert Basis.parse("frequency") is Basis.FREQ
    assert Basis.TIME.other is Basis.FREQ
    with pytest.raises(ConfigError):
        Basis.parse("phase")
