import math

import pytest

from tfqkd.config import RunConfig
from tfqkd.exceptions import KeyAbort
from tfqkd.model import Basis
from tfqkd.pipeline import analyze, frame_requirements, grids_for, scan


def test_grids_fit_tail_budget(config):
    gX, gP = grids_for(config, 1e9)
    assert gX.basis is Basis.TIME and gP.basis is Basis.FREQ
    assert gX.delta == 0.06 and gP.delta == 5.0
    assert gX.M % 2 == 1 and gP.M % 2 == 1


def test_operating_point_report(config):
    r = analyze(config, 50.0)
    assert r.aborted is None
    assert r.l > 0
    assert r.details["nu"] > 0
    assert r.details["eps_prime"] + r.details["eps_dprime"] <= config.eps_s / 21 * config.tail_fraction * (1 + 1e-9)
    assert r.frame_time == pytest.approx(2 * r.details["Delta_X"])
    assert r.d_0 == r.bounds.d_P1_hi


def test_freq_basis_key(config):
    r = analyze(config.replace(basis="freq"), 20.0)
    assert r.details["Delta_X"] > 100


def test_long_distance_gives_zero_key(config):
    r = analyze(config.replace(N=1e9), 120.0)
    assert r.l == 0


def test_fixed_threshold_below_bound_aborts(config):
    r = analyze(config.replace(d0=0.05), 10.0)
    assert r.aborted == KeyAbort.DISTANCE_THRESHOLD_EXCEEDED


def test_scan_order_and_workers(config):
    cfg = config.replace(scan=(0.0, 40.0, 10.0))
    serial = [r.l for r in scan(cfg)]
    parallel = [r.l for r in scan(cfg.replace(workers=3))]
    assert serial == parallel
    assert serial == sorted(serial, reverse=True)


def test_mc_distance_model(config):
    r = analyze(config.replace(d_model="mc", mc_samples=200_000), 10.0)
    assert 0.05 < r.details["d_model"] < 0.3


def test_frame_requirements(config):
    frame, cutoff = frame_requirements(config, 50.0)
    assert 11 < frame < 13
    assert math.isfinite(cutoff)
