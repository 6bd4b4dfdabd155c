import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import dblquad
from scipy.stats import multivariate_normal

from tfqkd.exceptions import ConfigError
from tfqkd.infotheory import (
    BinnedDistribution,
    average_distance,
    bin_probabilities,
    marginal_bin_probabilities,
    mutual_information,
    reconciliation_leakage,
    shannon_entropy,
)
from tfqkd.model import GaussianJoint, gaussian_joint
from tfqkd.uncertainty import MeasurementGrid


def _rectangle(mvn, x0, x1, y0, y1):
    val, _ = dblquad(lambda y, x: mvn.pdf([x, y]), x0, x1, y0, y1, epsabs=1e-12, epsrel=1e-10)
    return val


def test_joint_masses_match_bivariate_cdf():
    joint = GaussianJoint("time", 1.0, 1.3, 0.7)
    grid = MeasurementGrid("time", 0.5, 1.0)
    p = bin_probabilities(joint, grid).probs
    mvn = multivariate_normal(mean=[0, 0], cov=joint.covariance)
    ext = np.concatenate(([-10.0], grid.edges, [10.0]))
    for i, j in [(0, 0), (1, 2), (2, 2), (3, 1), (4, 4), (0, 4)]:
        ref = _rectangle(mvn, ext[i], ext[i + 1], ext[j], ext[j + 1])
        assert p[i, j] == pytest.approx(ref, abs=1e-8)


def test_joint_marginals_match_closed_form():
    joint = GaussianJoint("time", 1.0, 2.0, 0.9)
    grid = MeasurementGrid("time", 0.25, 2.0)
    dist = bin_probabilities(joint, grid)
    np.testing.assert_allclose(dist.probs.sum(axis=1), marginal_bin_probabilities(1.0, grid), atol=1e-10)
    np.testing.assert_allclose(dist.probs.sum(axis=0), marginal_bin_probabilities(2.0, grid), atol=1e-10)


def test_degenerate_joint_is_diagonal():
    grid = MeasurementGrid("time", 0.5, 1.0)
    dist = bin_probabilities(GaussianJoint("time", 1.0, 1.0, 1.0), grid)
    assert np.count_nonzero(dist.probs - np.diag(np.diag(dist.probs))) == 0
    assert mutual_information(dist) == pytest.approx(shannon_entropy(dist.marginal()))


def test_independent_joint_has_no_information():
    grid = MeasurementGrid("time", 0.5, 2.0)
    dist = bin_probabilities(GaussianJoint("time", 1.0, 1.0, 0.0), grid)
    assert mutual_information(dist) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("rho", [0.0, 0.5, 0.9])
def test_fine_bin_limits(rho):
    delta = 0.02
    grid = MeasurementGrid.covering("time", delta, 9.0)
    dist = bin_probabilities(GaussianJoint("time", 1.0, 1.0, rho), grid)
    h = 0.5 * math.log2(2 * math.pi * math.e) + math.log2(1 / delta)
    assert shannon_entropy(dist.marginal()) == pytest.approx(h, abs=0.05)
    assert mutual_information(dist) == pytest.approx(-0.5 * math.log2(1 - rho**2), abs=0.05)


def test_strong_correlation_fine_bin_limit(source):
    # conditional spread 0.02 ns; bins 4x finer recover the differential value
    joint = gaussian_joint("time", source)
    grid = MeasurementGrid.covering("time", 0.005, 2.0)
    mi = mutual_information(bin_probabilities(joint, grid))
    assert mi == pytest.approx(-0.5 * math.log2(1 - joint.rho**2), abs=0.05)


def test_default_time_grid_entropies(source):
    # binned values at 60 ps; coarse relative to the 20 ps conditional spread
    joint = gaussian_joint("time", source)
    grid = MeasurementGrid.covering("time", 0.06, 3.5)
    dist = bin_probabilities(joint, grid)
    H = shannon_entropy(dist.marginal())
    I = mutual_information(dist)
    assert H == pytest.approx(0.5 * math.log2(2 * math.pi * math.e * 0.2501) + math.log2(1 / 0.06), abs=0.01)
    assert 3.9 < I < -0.5 * math.log2(1 - joint.rho**2)


def test_binned_information_never_exceeds_continuous():
    joint = GaussianJoint("time", 1.0, 1.0, 0.95)
    for delta in (1.0, 0.5, 0.2, 0.1):
        grid = MeasurementGrid.covering("time", delta, 8.0)
        assert mutual_information(bin_probabilities(joint, grid)) <= -0.5 * math.log2(1 - 0.95**2) + 1e-9


def test_entropy_edge_cases():
    assert shannon_entropy(np.array([1.0, 0.0])) == 0.0
    assert shannon_entropy(np.full(8, 1 / 8)) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        mutual_information(np.full(4, 0.25))


def test_distribution_validation():
    grid = MeasurementGrid("time", 0.5, 0.5)
    with pytest.raises(ConfigError):
        BinnedDistribution(grid, [0.5, 0.6, 0.1])


def test_leakage():
    assert reconciliation_leakage(1e6, 5.0, 4.0, 0.9) == pytest.approx(1.4e6)
    assert reconciliation_leakage(1e6, 1.0, 4.0, 0.9) == 0.0
    with pytest.raises(ConfigError):
        reconciliation_leakage(1.0, 1.0, 1.0, 1.2)


def test_average_distance():
    assert average_distance([0, 3, 5], [1, 3, 2]) == pytest.approx(4 / 3)
    assert average_distance(np.array([0.5]), np.array([0.25])) == 0.25
    # unsigned inputs must not wrap around
    assert average_distance(np.array([0], np.uint8), np.array([3], np.uint8)) == 3.0
    with pytest.raises(ValueError):
        average_distance([1, 2], [1])
    with pytest.raises(ValueError):
        average_distance([], [])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 50), st.integers(0, 50)), min_size=1, max_size=40))
def test_average_distance_is_symmetric_and_bounded(pairs):
    a, b = map(list, zip(*pairs))
    d = average_distance(a, b)
    assert d == average_distance(b, a)
    assert 0 <= d <= 50
