"""Finite-key security analysis for decoy-state time-frequency QKD."""
from .config import RunConfig, load_config
from .exceptions import ConfigError, GridTooCoarseError, KeyAbort, TFQKDError, UndefinedInputError
from .finitekey import KeyRateReport
from .model import Basis
from .pipeline import analyze, frame_requirements, scan

__all__ = [
    "Basis",
    "ConfigError",
    "GridTooCoarseError",
    "KeyAbort",
    "KeyRateReport",
    "RunConfig",
    "TFQKDError",
    "UndefinedInputError",
    "analyze",
    "frame_requirements",
    "load_config",
    "scan",
]
