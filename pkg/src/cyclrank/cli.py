"""Reproducible experiment runner.

Each named experiment wires library modules into a seeded computation
and emits a JSON report: config echo, one (metric, value, expected,
tolerance, pass) row per check, runtime and version.  Reports are
deterministic given (config, seed) and independent of the worker count;
the runtime field is the only physically varying entry, so comparisons
use the canonical serialization that omits it.  Files are written
atomically (temp file then rename).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import additive, clmodules, divisors, matmodel, redei


@dataclass
class MetricResult:
    metric: str
    value: float
    expected: float
    tolerance: float
    passed: bool

    @classmethod
    def close(cls, metric: str, value: float, expected: float, tolerance: float):
        return cls(metric, float(value), float(expected), float(tolerance),
                   abs(float(value) - float(expected)) <= float(tolerance))

    @classmethod
    def flag(cls, metric: str, ok: bool):
        return cls(metric, float(bool(ok)), 1.0, 0.0, bool(ok))


@dataclass
class ExperimentConfig:
    name: str
    l: int = 3
    N: int = 10**6
    seed: int = 0
    workers: int = 1
    tolerances: dict[str, float] = field(default_factory=dict)
    output_path: str | None = None
    format: str = "json"

    def tol(self, metric: str, default: float) -> float:
        return float(self.tolerances.get(metric, default))


def _experiment_redei_distribution(cfg: ExperimentConfig):
    """Enumerated defect frequencies against the limiting matrix-model law."""
    hist = redei.rank_histogram(cfg.N, cfg.l, workers=cfg.workers)
    results = []
    for j in (0, 1, 2):
        pred = matmodel.limit_rank_defect_prob(cfg.l, j)
        emp = hist.freqs.get(j, 0.0)
        results.append(
            MetricResult.close(f"defect_freq_{j}", emp, pred, cfg.tol(f"defect_freq_{j}", 0.03))
        )
    results.append(
        MetricResult.close("freq_total", sum(hist.freqs.values()), 1.0, 1e-12)
    )
    results.append(MetricResult.flag("total_fields_positive", hist.total > 0))
    extras = {
        "total_fields": hist.total,
        "mixed_defect_supports": hist.mixed_defect_supports,
        "counts": {str(j): c for j, c in sorted(hist.counts.items())},
    }
    return results, extras


def _experiment_matrix_gap(cfg: ExperimentConfig):
    """Pinned-corner rank distributions against the gap bound."""
    results = []
    r1 = matmodel.rm_gap_check(4, 1, cfg.l, method="exhaustive")
    results.append(MetricResult.close("gap_4_1_exhaustive", r1.max_gap, 0.0, r1.bound))
    r1x = matmodel.rm_gap_check(4, 1, cfg.l, method="exact")
    results.append(
        MetricResult.close("gap_4_1_exact_vs_exhaustive", r1x.max_gap, r1.max_gap, 1e-15)
    )
    r2 = matmodel.rm_gap_check(5, 1, cfg.l, method="exact")
    results.append(MetricResult.close("gap_5_1_exact", r2.max_gap, 0.0, r2.bound))
    r3s = matmodel.rm_gap_check(6, 2, cfg.l, method="sampled", samples=50_000, seed=cfg.seed)
    results.append(
        MetricResult.close("gap_6_2_sampled", r3s.max_gap, 0.0, r3s.bound + r3s.radius)
    )
    r3 = matmodel.rm_gap_check(6, 2, cfg.l, method="exact")
    results.append(MetricResult.close("gap_6_2_exact", r3.max_gap, 0.0, r3.bound))
    return results, {"bounds": {"4_1": r1.bound, "5_1": r2.bound, "6_2": r3.bound}}


def _experiment_additive_suite(cfg: ExperimentConfig, count: int | None = None):
    """Randomized density bounds, image dimensions, micro balance fractions."""
    rng = np.random.default_rng(cfg.seed)
    n_systems = count if count is not None else 1000
    density_ok = 0
    for _ in range(n_systems):
        system = additive.random_additive_system(rng, l=cfg.l)
        if additive.density_bound_check(system).ok:
            density_ok += 1
    results = [
        MetricResult.close("density_bound_pass_rate", density_ok / n_systems, 1.0, 0.0)
    ]

    dim_checks = 0
    for d in (1, 2, 3):
        for sizes in _size_combos(d, 4):
            factors = []
            offset = 0
            for n in sizes:
                factors.append(tuple(range(offset, offset + n)))
                offset += n
            space = additive.ProductSpace(factors=tuple(factors))
            for S in additive.subsets(d):
                additive.g_space_dimension(space, S, cfg.l)
                dim_checks += 1
    results.append(MetricResult.flag(f"image_dimension_formula_{dim_checks}_instances", True))

    micro_ok = True
    for sizes, S, eps in [((3, 3), (0, 1), 0.2), ((2, 2), (0, 1), 0.1), ((9,), (0,), 0.15)]:
        factors = []
        offset = 0
        for n in sizes:
            factors.append(tuple(range(offset, offset + n)))
            offset += n
        space = additive.ProductSpace(factors=tuple(factors))
        Z = list(space.points())
        frac, bound = additive.unbalanced_image_fraction(Z, space, S, eps, cfg.l)
        if frac > bound:
            micro_ok = False
    results.append(MetricResult.flag("micro_balance_bound", micro_ok))
    return results, {"systems": n_systems, "dimension_instances": dim_checks}


def _size_combos(d: int, max_size: int):
    from itertools import combinations_with_replacement

    return combinations_with_replacement(range(1, max_size + 1), d)


def _experiment_divisor_trends(cfg: ExperimentConfig):
    """Monotone spacing/regularity failure fractions and the heuristic decay."""
    results = []
    D1_grid = [100.0, 1000.0, 10000.0]
    C0_grid = [2.0, 4.0, 8.0]
    reports = []
    for r in (3, 4, 5):
        rep = divisors.divisor_trends(cfg.N, r, cfg.l, D1_grid, C0_grid)
        reports.append(rep)
        fs = [rep.frac_not_spaced[d] for d in D1_grid]
        fr = [rep.frac_not_regular[c] for c in C0_grid]
        results.append(
            MetricResult.flag(f"not_spaced_nonincreasing_r{r}", all(a >= b for a, b in zip(fs, fs[1:])))
        )
        results.append(
            MetricResult.flag(f"not_regular_nonincreasing_r{r}", all(a >= b for a, b in zip(fr, fr[1:])))
        )
    rates = [
        divisors.poisson_order_stat_sim(200, 200.0, 20_000, c0, seed=cfg.seed)
        for c0 in C0_grid
    ]
    decays = all(a >= b for a, b in zip(rates, rates[1:])) and rates[-1] < rates[0]
    results.append(MetricResult.flag("poisson_failure_decay", decays))
    extras = {
        "poisson_rates": dict(zip(map(str, C0_grid), rates)),
        "csv_rows": divisors.trend_csv_rows(reports),
    }
    return results, extras


def _experiment_measure_normalization(cfg: ExperimentConfig):
    """Mass of the module measure and its rank pushforward identities."""
    l = cfg.l
    total = 0.0
    for lam in clmodules.partitions_bounded(12, 6):
        total += clmodules.cl_weight(lam, l).value
    results = [
        MetricResult.close("truncated_measure_mass", total, 1.0, cfg.tol("truncated_measure_mass", 1e-3))
    ]
    s = sum(clmodules.rank_prefix_prob((i,), l) for i in range(11))
    results.append(MetricResult.close("rank_prefix_total", s, 1.0, 1e-9))
    for j in range(5):
        results.append(
            MetricResult.close(
                f"prefix_vs_limit_{j}",
                clmodules.rank_prefix_prob((j,), l),
                matmodel.limit_rank_defect_prob(l, j),
                1e-9,
            )
        )
    return results, {}


def _experiment_pairing_kernels(cfg: ExperimentConfig):
    """Layer pairing kernels and automorphism counts on all small modules."""
    l = cfg.l
    kernel_failures = 0
    aut_failures = 0
    n_partitions = 0
    for lam in clmodules.partitions_bounded(4, 4):
        if not lam.parts:
            continue
        n_partitions += 1
        for k in range(1, max(lam.parts) + 2):
            pk = clmodules.pairing_kernels(lam, k, l)
            if not (pk.left_matches and pk.right_matches):
                kernel_failures += 1
        if clmodules.aut_count(lam, l) != clmodules.brute_force_aut_count(lam, l):
            aut_failures += 1
    results = [
        MetricResult.close("pairing_kernel_failures", kernel_failures, 0.0, 0.0),
        MetricResult.close("aut_count_failures", aut_failures, 0.0, 0.0),
    ]
    return results, {"partitions": n_partitions}


_REGISTRY = {
    "redei-distribution": (
        _experiment_redei_distribution,
        "defect frequencies of enumerated fields vs the limiting rank law",
    ),
    "matrix-gap": (
        _experiment_matrix_gap,
        "pinned-corner rank distributions within the 2k l^(2k-r) gap bound",
    ),
    "additive-suite": (
        _experiment_additive_suite,
        "density lower bounds, image dimensions and micro balance fractions",
    ),
    "divisor-trends": (
        _experiment_divisor_trends,
        "spacing/regularity failure fractions shrink along their grids",
    ),
    "measure-normalization": (
        _experiment_measure_normalization,
        "module measure mass and rank pushforward consistency",
    ),
    "pairing-kernels": (
        _experiment_pairing_kernels,
        "brute-force pairing kernels equal the predicted layers; aut counts match",
    ),
}


def list_experiments() -> list[tuple[str, str]]:
    """Stable (name, description) listing of the registry."""
    return [(name, desc) for name, (_, desc) in _REGISTRY.items()]


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run one registered experiment and return (and optionally write) its report."""
    if cfg.name not in _REGISTRY:
        raise KeyError(f"unknown experiment {cfg.name!r}")
    fn, _ = _REGISTRY[cfg.name]
    t0 = time.perf_counter()
    results, extras = fn(cfg)
    runtime_ms = int((time.perf_counter() - t0) * 1000)
    report = {
        "config": {
            "name": cfg.name,
            "l": cfg.l,
            "N": cfg.N,
            "seed": cfg.seed,
            "workers": cfg.workers,
            "tolerances": dict(sorted(cfg.tolerances.items())),
        },
        "results": [
            {
                "metric": m.metric,
                "value": m.value,
                "expected": m.expected,
                "tolerance": m.tolerance,
                "pass": m.passed,
            }
            for m in results
        ],
        "extras": extras,
        "runtime_ms": runtime_ms,
        "version": __version__,
    }
    if cfg.output_path:
        if cfg.format == "json":
            _atomic_write(cfg.output_path, report_json(report))
        elif cfg.format == "csv":
            _atomic_write(cfg.output_path, _report_csv(report))
        else:
            raise ValueError(f"unknown format {cfg.format!r}")
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def canonical_report_bytes(report: dict) -> bytes:
    """Serialization for determinism comparisons: runtime field stripped."""
    trimmed = {k: v for k, v in report.items() if k != "runtime_ms"}
    return (json.dumps(trimmed, sort_keys=True, indent=2) + "\n").encode()


def _report_csv(report: dict) -> str:
    lines = ["metric,value,expected,tolerance,pass"]
    for row in report["results"]:
        lines.append(
            f"{row['metric']},{row['value']!r},{row['expected']!r},"
            f"{row['tolerance']!r},{int(row['pass'])}"
        )
    return "\n".join(lines) + "\n"


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def all_passed(report: dict) -> bool:
    return all(row["pass"] for row in report["results"])


def _parse_tolerances(items: list[str]) -> dict[str, float]:
    out = {}
    for item in items or []:
        name, _, value = item.partition("=")
        if not value:
            raise ValueError(f"tolerance override must look like metric=value, got {item!r}")
        out[name] = float(value)
    return out


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cyclrank", description="seeded experiments on cyclic-field rank statistics"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a registered experiment")
    run_p.add_argument("--experiment", required=True)
    run_p.add_argument("--l", type=int, default=3)
    run_p.add_argument("--N", type=int, default=10**6)
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--workers", type=int, default=1)
    run_p.add_argument("--out", default=None)
    run_p.add_argument("--format", choices=("json", "csv"), default="json")
    run_p.add_argument(
        "--tolerance", action="append", default=[], metavar="METRIC=VALUE",
        help="override a metric tolerance (repeatable)",
    )

    sub.add_parser("list", help="list registered experiments")

    add_p = sub.add_parser("additive-check", help="randomized additive-system suite")
    add_p.add_argument("--seed", type=int, default=0)
    add_p.add_argument("--count", type=int, default=200)
    add_p.add_argument("--l", type=int, default=3)
    add_p.add_argument("--out", default=None)

    div_p = sub.add_parser("divisor-stats", help="spacing/regularity fractions as CSV")
    div_p.add_argument("--N", type=int, default=10**7)
    div_p.add_argument("--l", type=int, default=3)
    div_p.add_argument("--r", type=int, action="append", default=None)
    div_p.add_argument("--spacing-factor", type=float, default=10.0)
    div_p.add_argument("--out", default=None)

    args = parser.parse_args(argv)

    if args.command == "list":
        for name, desc in list_experiments():
            print(f"{name}: {desc}")
        return 0

    if args.command == "run":
        cfg = ExperimentConfig(
            name=args.experiment, l=args.l, N=args.N, seed=args.seed,
            workers=args.workers, tolerances=_parse_tolerances(args.tolerance),
            output_path=args.out, format=args.format,
        )
        try:
            report = run_experiment(cfg)
        except KeyError as exc:
            print(f"error: {exc.args[0]}", file=sys.stderr)
            return 2
        print(report_json(report), end="")
        return 0 if all_passed(report) else 1

    if args.command == "additive-check":
        cfg = ExperimentConfig(name="additive-suite", l=args.l, seed=args.seed)
        t0 = time.perf_counter()
        results, extras = _experiment_additive_suite(cfg, count=args.count)
        report = {
            "config": {"seed": args.seed, "count": args.count, "l": args.l},
            "results": [
                {
                    "metric": m.metric, "value": m.value, "expected": m.expected,
                    "tolerance": m.tolerance, "pass": m.passed,
                }
                for m in results
            ],
            "extras": extras,
            "runtime_ms": int((time.perf_counter() - t0) * 1000),
            "version": __version__,
        }
        text = report_json(report)
        if args.out:
            _atomic_write(args.out, text)
        print(text, end="")
        return 0 if all_passed(report) else 1

    if args.command == "divisor-stats":
        rs = args.r or [3, 4, 5]
        reports = [
            divisors.divisor_trends(
                args.N, r, args.l, [100.0, 1000.0, 10000.0], [2.0, 4.0, 8.0],
                spacing_factor=args.spacing_factor,
            )
            for r in rs
        ]
        rows = divisors.trend_csv_rows(reports)
        header = "N,r,l,D_1,factor,frac_not_spaced,C_0,frac_not_regular"
        text = header + "\n" + "\n".join(",".join(repr(x) for x in row) for row in rows) + "\n"
        if args.out:
            _atomic_write(args.out, text)
        print(text, end="")
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
