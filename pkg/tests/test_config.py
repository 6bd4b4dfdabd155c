import math

import pytest

from tfqkd.config import RunConfig, load_config, parse_scan
from tfqkd.exceptions import ConfigError
from tfqkd.model import Basis


def test_defaults_are_valid():
    cfg = load_config()
    assert cfg == RunConfig()
    assert cfg.delta_w_rad == 5.0


def test_angular_convention():
    cfg = RunConfig(freq_convention="angular")
    assert cfg.delta_w_rad == pytest.approx(10 * math.pi)


def test_file_and_override_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nsamples = 1e9\nbasis = freq\nmu = 0.3, 0.1, 0.02\nscan = 0:20:5\nd_model = mc\n")
    cfg = load_config(path, {"N": "1e10"})
    assert cfg.N == 1e10
    assert cfg.basis is Basis.FREQ
    assert cfg.mu == (0.3, 0.1, 0.02)
    assert cfg.d_model == "mc"
    assert cfg.distances() == [0.0, 5.0, 10.0, 15.0, 20.0]


def test_all_violations_reported_together(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("mu = 0.1, 0.1, 0.2\np_mu = 0.5, 0.2, 0.2\nbeta = 2\nbogus = 1\n")
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert any("bogus" in v for v in info.value.violations)
    with pytest.raises(ConfigError) as info:
        load_config(path, {"bogus": None})
    assert len(info.value.violations) == 1
    with pytest.raises(ConfigError) as info:
        RunConfig(mu=(0.1, 0.1, 0.2), p_mu=(0.5, 0.2, 0.2), beta=2.0).validated()
    assert len(info.value.violations) >= 4


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.cfg")


def test_parse_scan():
    assert parse_scan("0:150:1") == (0.0, 150.0, 1.0)
    with pytest.raises(ConfigError):
        parse_scan("0:150")
    assert len(RunConfig().distances()) == 151
