"""
Run configuration: defaults, key-value file ingestion and validation.

Config files are flat ``key = value`` text (``#`` comments allowed); lists
are comma separated and the scan range is ``start:stop:step`` in km.
"""
from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path

from .exceptions import ConfigError
from .model import Basis, ChannelSpec, DetectorSpec, SourceSpec

__all__ = ["RunConfig", "load_config", "parse_scan"]

FREQ_CONVENTIONS = ("numeric", "angular")


def parse_scan(text: str) -> tuple[float, float, float]:
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError(f"scan must be start:stop:step, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"scan must be numeric start:stop:step, got {text!r}") from None


@dataclass(frozen=True)
class RunConfig:
    """Every tunable of a run. Defaults are the reference operating parameters."""

    # source
    sigma_coh: float = 0.5
    sigma_cor: float = 0.02
    mu: tuple = (0.2, 0.1, 0.01)
    p_mu: tuple = (0.7, 0.2, 0.1)
    # channel and detectors
    distance: float = 0.0
    loss_exponent: float = 0.02
    dark_prob: float = 6e-7
    eta_A: float = 0.93
    eta_B: float = 0.93
    # measurement grids
    delta_t: float = 0.06
    delta_w: float = 5.0
    # "numeric": delta_w is already in rad/ns; "angular": delta_w is an
    # ordinary frequency in GHz and gets multiplied by 2 pi
    freq_convention: str = "numeric"
    overlap_method: str = "prolate"
    # fraction of eps_s/21 spent on the two cutoff tails, and the key-basis share of it
    tail_fraction: float = 0.5
    tail_split: float = 0.5
    # protocol
    eps_s: float = 1e-10
    eps_c: float = 1e-10
    beta: float = 0.94
    p_X: float = 0.5
    N: float = 1e11
    basis: Basis = Basis.TIME
    # average check-basis distance: a number, or "mc" to estimate it by sampling
    d_model: object = 0.1
    mc_samples: int = 10**6
    # None: threshold equals the estimated bound (tightest non-aborting choice)
    d0: float | None = None
    anchor_intensity: int = 1
    # runner
    scan: tuple = (0.0, 150.0, 1.0)
    output: str | None = None
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "basis", Basis.parse(self.basis))
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        object.__setattr__(self, "p_mu", tuple(float(p) for p in self.p_mu))
        object.__setattr__(self, "scan", tuple(float(s) for s in self.scan))

    def violations(self) -> list[str]:
        out = []
        src = object.__new__(SourceSpec)
        for name in ("sigma_coh", "sigma_cor", "mu", "p_mu"):
            object.__setattr__(src, name, getattr(self, name))
        out += src.violations()
        if not self.distance >= 0:
            out.append("distance must be non-negative")
        if not self.loss_exponent >= 0:
            out.append("loss_exponent must be non-negative")
        if not 0 <= self.dark_prob < 1:
            out.append("dark_prob must lie in [0, 1)")
        if not (0 < self.eta_A <= 1 and 0 < self.eta_B <= 1):
            out.append("detector efficiencies must lie in (0, 1]")
        if not (self.delta_t > 0 and self.delta_w > 0):
            out.append("bin widths must be positive")
        if self.freq_convention not in FREQ_CONVENTIONS:
            out.append(f"freq_convention must be one of {FREQ_CONVENTIONS}")
        if self.overlap_method not in ("prolate", "kernel", "small-u"):
            out.append("overlap_method must be prolate, kernel or small-u")
        if not 0 < self.tail_fraction < 1:
            out.append("tail_fraction must lie in (0, 1)")
        if not 0 < self.tail_split < 1:
            out.append("tail_split must lie in (0, 1)")
        if not (0 < self.eps_s < 1 and 0 < self.eps_c < 1):
            out.append("eps_s and eps_c must lie in (0, 1)")
        if not 0 <= self.beta <= 1:
            out.append("beta must lie in [0, 1]")
        if not 0 < self.p_X < 1:
            out.append("p_X must lie in (0, 1)")
        if not self.N > 0:
            out.append("N must be positive")
        if isinstance(self.d_model, str):
            if self.d_model != "mc":
                out.append("d_model must be a number or 'mc'")
        elif not 0 <= self.d_model:
            out.append("d_model must be non-negative")
        if self.mc_samples < 1:
            out.append("mc_samples must be positive")
        if self.d0 is not None and not self.d0 >= 0:
            out.append("d0 must be non-negative")
        if self.anchor_intensity not in (1, 2, 3):
            out.append("anchor_intensity must be 1, 2 or 3")
        start, stop, step = self.scan
        if not step > 0:
            out.append("scan step must be positive")
        if start < 0 or stop < start:
            out.append("scan range must satisfy 0 <= start <= stop")
        if self.workers < 1:
            out.append("workers must be at least 1")
        return out

    def validated(self) -> "RunConfig":
        problems = self.violations()
        if problems:
            raise ConfigError(problems)
        return self

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    @property
    def delta_w_rad(self) -> float:
        """Frequency bin width in rad/ns."""
        return self.delta_w * (2 * math.pi if self.freq_convention == "angular" else 1.0)

    def source(self) -> SourceSpec:
        return SourceSpec(self.sigma_coh, self.sigma_cor, self.mu, self.p_mu)

    def channel(self, distance: float | None = None) -> ChannelSpec:
        return ChannelSpec(self.distance if distance is None else distance, self.loss_exponent)

    def detector(self) -> DetectorSpec:
        return DetectorSpec(self.dark_prob, self.eta_A, self.eta_B)

    def distances(self) -> list[float]:
        start, stop, step = self.scan
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(count)]


_FIELDS = {f.name: f for f in fields(RunConfig)}
_ALIASES = {"samples": "N"}


def _coerce(name: str, raw):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    if name in ("mu", "p_mu"):
        return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())
    if name == "scan":
        return parse_scan(text)
    if name == "basis":
        return Basis.parse(text)
    if name in ("freq_convention", "overlap_method"):
        return text.lower()
    if name == "output":
        return text or None
    if name == "d_model":
        return "mc" if text.lower() == "mc" else float(text)
    if name == "d0":
        return None if text.lower() in ("", "auto", "none") else float(text)
    if name in ("mc_samples", "seed", "workers", "anchor_intensity"):
        return int(float(text))
    return float(text)


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Build a validated config from an optional file plus overrides.

    Overrides win over file values. All problems (unknown keys, bad values,
    violated constraints) are reported together in one :class:`ConfigError`.
    """
    values: dict = {}
    problems: list[str] = []
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        parser.optionxform = str
        try:
            parser.read_string("[run]\n" + text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from None
        values.update(parser["run"])
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    kwargs = {}
    for key, raw in values.items():
        name = _ALIASES.get(key, key)
        if name not in _FIELDS:
            problems.append(f"unknown config key {key!r}")
            continue
        try:
            kwargs[name] = _coerce(name, raw)
        except (ValueError, ConfigError) as exc:
            problems.append(f"bad value for {key}: {exc}")
    if problems:
        raise ConfigError(problems)
    return RunConfig(**kwargs).validated()
