"""
Command-line front end.

    tfqkd point    [--distance KM] ...    one operating point, itemised
    tfqkd scan     [--scan 0:150:1] ...   CSV of key figures versus distance
    tfqkd validate [--samples N] ...      run the oracle cross-checks

Exit codes: 0 success, 1 config error, 2 aborted at every point,
3 validation failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import mcsim
from .config import RunConfig, load_config
from .decoy import estimate_bounds
from .exceptions import ConfigError
from .finitekey import KeyRateReport
from .infotheory import bin_probabilities, mutual_information, shannon_entropy
from .model import (
    ChannelSpec,
    DetectorSpec,
    GaussianJoint,
    ObservedCounts,
    SourceSpec,
    coincidence_prob,
    coincidence_prob_series,
    gaussian_joint,
    poisson_photon_prob,
    tau_n,
)
from .pipeline import analyze, frame_requirements, grids_for, scan
from .uncertainty import MeasurementGrid, kernel_lambda0, overlap_c

__all__ = ["main", "run_point", "run_scan", "run_validate", "CSV_HEADER", "format_row"]

EXIT_OK, EXIT_CONFIG, EXIT_ALL_ABORTED, EXIT_VALIDATION = 0, 1, 2, 3

CSV_HEADER = [
    "distance_km",
    "rate_per_use",
    "pie",
    "bits_per_sec",
    "l",
    "n_x1_lo",
    "n_x0_lo",
    "d_p1_hi",
    "c_prime",
    "aborted",
]


def _num(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return f"{x:.10g}"


def format_row(report: KeyRateReport) -> list[str]:
    b = report.bounds
    return [
        _num(report.details.get("distance_km", math.nan)),
        _num(report.rate),
        _num(report.pie),
        _num(report.bits_per_second),
        str(report.l),
        _num(b.n_X1_lo if b else math.nan),
        _num(b.n_X0_lo if b else math.nan),
        _num(b.d_P1_hi if b else math.nan),
        _num(report.c_prime),
        report.aborted or "none",
    ]


def render_report(report: KeyRateReport, config: RunConfig) -> str:
    out = io.StringIO()
    w = lambda s="": print(s, file=out)
    d = report.details
    w(f"distance        {d.get('distance_km', math.nan):g} km   N = {config.N:.3g}   key basis = {config.basis.value}")
    w(f"grids           M_X = {report.M_X}   M_P = {report.M_P}   overlap c = {report.c:.6g}")
    if report.bounds is not None:
        b = report.bounds
        w(f"decoy bounds    n_X0- = {b.n_X0_lo:.6g}   n_X1- = {b.n_X1_lo:.6g}   n_P1- = {b.n_P1_lo:.6g}")
        w(f"                N1+ = {b.N1_hi:.6g}   n_P1+ = {b.n_P1_hi:.6g}   d+_P1 = {b.d_P1_hi:.6g}")
        if b.clamped:
            w(f"                clamped: {', '.join(b.clamped)}")
    if report.aborted:
        w(f"ABORTED         {report.aborted}: {report.abort_detail}")
    else:
        w(f"threshold       d0 = {report.d_0:.6g}   C' = {report.c_prime:.6g}")
        labels = {
            "uncertainty": "uncertainty credit",
            "gamma": "max-entropy penalty",
            "vacuum": "vacuum credit",
            "leakage": "reconciliation leakage",
            "eps_overhead": "smoothing overhead",
            "correctness": "correctness overhead",
        }
        for key, label in labels.items():
            w(f"  {label:<24}{report.components[key]:>+22.6f} bits")
        w(f"  {'total (before floor)':<24}{report.pre_floor:>+22.6f} bits")
    w(f"key length      l = {report.l}   l/N = {report.rate:.6g}   PIE = {report.pie:.6g} bits/coincidence")
    w(f"frame           T_f = {report.frame_time:.6g} ns   max clock = {report.max_clock / 1e6:.6g} MHz")
    w(f"throughput      {report.bits_per_second:.6g} bits/s")
    return out.getvalue()


def run_point(config: RunConfig, stream=None) -> KeyRateReport:
    stream = sys.stdout if stream is None else stream
    report = analyze(config)
    stream.write(render_report(report, config))
    return report


def run_scan(config: RunConfig, stream=None) -> list[KeyRateReport]:
    """Write the scan CSV to ``config.output`` (or ``stream``) in distance order."""
    reports = scan(config)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in reports:
        writer.writerow(format_row(r))
    if config.output:
        try:
            with open(config.output, "w", newline="") as fh:
                fh.write(buf.getvalue())
        except OSError as exc:
            raise ConfigError(f"cannot write output {config.output}: {exc}") from None
    else:
        (sys.stdout if stream is None else stream).write(buf.getvalue())
    return reports


@dataclass
class OracleResult:
    name: str
    passed: bool
    deviation: float
    tolerance: float
    note: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.note})" if self.note else ""
        return f"[{tag}] {self.name:<38} max deviation {self.deviation:.3e} (tolerance {self.tolerance:.1e}){extra}"


def check_coincidence() -> OracleResult:
    worst = 0.0
    for mu in np.linspace(0, 1, 11):
        for T_exp in np.linspace(0, 4, 9):
            for pd in (0.0, 1e-6, 1e-4, 1e-3):
                ch = ChannelSpec(distance=T_exp / 0.02)
                det = DetectorSpec(dark_prob=pd)
                worst = max(worst, abs(coincidence_prob(mu, ch, det) - coincidence_prob_series(mu, ch, det)))
    return OracleResult("coincidence closed form vs series", worst <= 1e-12, worst, 1e-12)


def check_overlap(method: str = "prolate") -> OracleResult:
    worst = 0.0
    for u in np.geomspace(1e-4, 1.0, 25):
        c = overlap_c(4 * u, 1.0, method).c
        worst = max(worst, abs(c - kernel_lambda0(u)))
    return OracleResult(f"overlap c ({method}) vs kernel", worst <= 1e-6, worst, 1e-6)


def check_bin_masses(config: RunConfig, n: int) -> OracleResult:
    """Empirical marginal bin frequencies vs exact masses.

    The z-score threshold is Bonferroni-corrected over all tested bins for a
    family-wise false-alarm rate of 1e-3.
    """
    source = config.source()
    grid, _ = grids_for(config, 1e9)
    joint = gaussian_joint(config.basis, source)
    p = bin_probabilities(joint, grid).probs
    run = mcsim.sample_pairs(joint, grid, n, config.seed)
    worst, tested = 0.0, 0
    for hist, marg in ((run.histogram, p.sum(axis=1)), (np.bincount(run.b, minlength=grid.M), p.sum(axis=0))):
        mask = marg * n >= 25
        z = np.abs(hist[mask] - n * marg[mask]) / np.sqrt(n * marg[mask] * (1 - marg[mask]))
        worst = max(worst, float(z.max()))
        tested += int(mask.sum())
    limit = float(norm.isf(1e-3 / (2 * tested)))
    return OracleResult("bin masses vs Monte Carlo (z-score)", worst <= limit, worst, limit, f"n = {n}, {tested} bins")


def check_entropy_limits() -> OracleResult:
    worst = 0.0
    for rho in (0.0, 0.5, 0.9):
        joint = GaussianJoint("time", 1.0, 1.0, rho)
        delta = 0.02
        grid = MeasurementGrid.covering("time", delta, 9.0)
        dist = bin_probabilities(joint, grid)
        h = 0.5 * math.log2(2 * math.pi * math.e) + math.log2(1 / delta)
        mi = -0.5 * math.log2(1 - rho**2)
        worst = max(worst, abs(shannon_entropy(dist.marginal()) - h), abs(mutual_information(dist) - mi))
    return OracleResult("binned entropy vs fine-bin limit", worst <= 0.05, worst, 0.05)


def enumeration_truth(yields, source: SourceSpec, scale: float = 1e9):
    """Counts of an ``n <= len(yields)-1`` photon model and its true n-photon split."""
    n_max = len(yields)
    by_photon = np.array([scale * tau_n(n, source) * yields[n] for n in range(n_max)])
    per_mu = np.array(
        [sum(source.p_mu[k] * poisson_photon_prob(n, source.mu[k]) * scale * yields[n] for n in range(n_max)) for k in range(3)]
    )
    return per_mu, by_photon


def random_source(rng) -> SourceSpec:
    while True:
        mu3 = rng.uniform(0.001, 0.1)
        mu2 = mu3 + rng.uniform(0.01, 0.4)
        mu1 = mu2 + mu3 + rng.uniform(0.01, 0.6)
        p = rng.dirichlet([2, 2, 2])
        if p.min() > 0.02:
            return SourceSpec(mu=(mu1, mu2, mu3), p_mu=tuple(p / p.sum()))


def check_decoy_one_sided(cases: int = 1000, seed: int = 0) -> OracleResult:
    """Asymptotic (eps_2 = 1) bounds against enumeration truth on random models."""
    rng = mcsim.rng_for(seed, 7)
    worst = 0.0
    failures = 0
    for _ in range(cases):
        source = random_source(rng)
        yields = rng.uniform(0, 1, 11)
        per_X, truth_X = enumeration_truth(yields, source)
        per_P, truth_P = enumeration_truth(rng.uniform(0, 1, 11), source)
        counts = ObservedCounts(N=1e9, n_X_mu=per_X, n_P_mu=per_P)
        b = estimate_bounds(counts, source, 1.0, M_P=2)
        scale = max(truth_X.sum(), 1.0)
        gaps = [
            (b.n_X0_lo - truth_X[0]) / scale,
            (b.n_X1_lo - truth_X[1]) / scale,
            (truth_X[1] + truth_P[1] - b.N1_hi) / scale,
            (truth_P[1] - b.n_P1_hi) / scale,
        ]
        gap = max(gaps)
        worst = max(worst, gap)
        failures += gap > 1e-9
    return OracleResult("decoy bounds one-sided (enumeration)", failures == 0, max(worst, 0.0), 1e-9, f"{failures}/{cases} violations")


def check_decoy_sampled(trials: int = 200, seed: int = 0, eps_2: float = 1e-10 / 21) -> OracleResult:
    """Finite-size bounds against photon-resolved Poisson draws."""
    rng = mcsim.rng_for(seed, 11)
    worst = -math.inf
    failures = 0
    for t in range(trials):
        source = random_source(rng)
        scale = 10 ** rng.uniform(5, 9)
        truths, observed = [], []
        for j in range(2):
            truth = rng.poisson(scale * np.array([tau_n(n, source) for n in range(11)]) * rng.uniform(0, 1, 11))
            truths.append(truth)
            observed.append(mcsim.sample_photon_resolved(truth, source, seed=2 * (seed * trials + t) + j))
        counts = ObservedCounts(N=scale, n_X_mu=observed[0], n_P_mu=observed[1])
        b = estimate_bounds(counts, source, eps_2, M_P=2)
        tX, tP = truths
        gap = max(b.n_X0_lo - tX[0], b.n_X1_lo - tX[1], tX[1] + tP[1] - b.N1_hi, tP[1] - b.n_P1_hi)
        worst = max(worst, gap)
        failures += gap > 0
    return OracleResult(
        "decoy bounds one-sided (sampled)", failures == 0, max(worst, 0.0), 0.0, f"{failures}/{trials} violations"
    )


def run_validate(config: RunConfig, stream=None, cases: int = 1000) -> list[OracleResult]:
    stream = sys.stdout if stream is None else stream
    results = [
        check_coincidence(),
        check_overlap(config.overlap_method),
        check_bin_masses(config, config.mc_samples),
        check_entropy_limits(),
        check_decoy_one_sided(cases, config.seed),
        check_decoy_sampled(seed=config.seed),
    ]
    for r in results:
        stream.write(r.line() + "\n")
    return results


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--distance", type=float, help="fibre length in km")
    common.add_argument("--samples", type=float, help="channel uses N")
    common.add_argument("--basis", choices=["time", "freq"], help="key-generating basis")
    common.add_argument("--scan", help="start:stop:step in km")
    common.add_argument("--seed", type=int)
    common.add_argument("--output", help="CSV output path")
    common.add_argument("--d-model", dest="d_model", help="check-basis average distance, or 'mc'")
    common.add_argument("--mc-samples", dest="mc_samples", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key")
    parser = argparse.ArgumentParser(prog="tfqkd", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("point", parents=[common], help="evaluate one distance")
    sub.add_parser("scan", parents=[common], help="write a CSV over a distance range")
    sub.add_parser("validate", parents=[common], help="run oracle cross-checks")
    sub.add_parser("requirements", parents=[common], help="minimum frame time and frequency cutoff")
    return parser


def _overrides(args) -> dict:
    out = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = value
    for key in ("distance", "seed", "output", "d_model", "mc_samples", "workers", "basis", "scan"):
        value = getattr(args, key)
        if value is not None:
            out[key] = value
    if args.samples is not None:
        out["N"] = args.samples
    return out


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config, _overrides(args))
        if args.command == "point":
            report = run_point(config)
            return EXIT_ALL_ABORTED if report.aborted else EXIT_OK
        if args.command == "scan":
            reports = run_scan(config)
            return EXIT_ALL_ABORTED if all(r.aborted for r in reports) else EXIT_OK
        if args.command == "validate":
            results = run_validate(config)
            return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION
        if args.command == "requirements":
            frame, cutoff = frame_requirements(config)
            print(f"minimum frame time     {frame:.6g} ns  (max clock {1e3 / frame:.6g} MHz)")
            print(f"frequency cutoff       {cutoff:.6g} rad/ns one-sided")
            return EXIT_OK
    except ConfigError as exc:
        print("configuration error:", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
