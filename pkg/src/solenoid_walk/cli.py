"""``solenoid-walk`` command line.

Exit codes: 0 success (any verdict), 1 bound violation (check-bounds only),
2 usage or config error, 3 depth or resource error.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from typing import Callable, Optional

import numpy as np

from . import __version__, kernels
from .config import ConfigError, RunConfig, load_config
from .criteria import (
    classify,
    necessary_series_formula,
    sufficient_series_formula,
)
from .distribution import DistributionError, StepDistribution, make_distribution
from .group import DepthExceededError, GroupSequence
from .integral import (
    bound_check_cosine,
    bound_check_lower_chain,
    bound_check_majorant,
    cell_lower_bound,
    cell_upper_bound,
    estimate_total,
    geometric_series_tail,
)
from .partition import (
    alpha_cell,
    cell_measure,
    emit_interval_family,
    interval_family_json,
    telescoping_check,
)
from .report import csv_table, dumps_report, make_report
from .solenoid import depth_for_tolerance
from .walker import return_experiment, visit_count_contrast

log = logging.getLogger("solenoid_walk")

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_DEPTH = 0, 1, 2, 3
COMMANDS = ("classify", "integrate", "simulate", "partition", "check-bounds")


class Outcome:
    """Result payload, CSV rendering and exit code of one command."""

    def __init__(self, result: dict, csv_header=(), csv_rows=(), code: int = EXIT_OK):
        self.result = result
        self.csv_header = csv_header
        self.csv_rows = list(csv_rows)
        self.code = code


def _setup(cfg: RunConfig) -> tuple[GroupSequence, StepDistribution]:
    seq = cfg.group
    return seq, make_distribution(cfg.distribution, seq)


def cmd_classify(cfg: RunConfig) -> Outcome:
    seq, dist = _setup(cfg)
    rep = classify(seq, dist, cfg.classify.n_terms)
    result = rep.to_dict()
    result["sufficient_series"]["formula"] = sufficient_series_formula(seq)
    if rep.necessary is not None:
        result["necessary_series"]["formula"] = necessary_series_formula(seq)
    nec = rep.necessary
    rows = []
    for i, (s, ps) in enumerate(zip(rep.sufficient.terms, rep.sufficient.partial_sums)):
        t = nec.terms[i] if nec else None
        pt = nec.partial_sums[i] if nec else None
        rows.append((i + 1, s, ps, t, pt))
    return Outcome(result, ("n", "sufficient_term", "sufficient_partial_sum",
                            "necessary_term", "necessary_partial_sum"), rows)


def _integration_depth(cfg: RunConfig, dist: StepDistribution) -> int:
    opts = cfg.integrate
    need = opts.n_cells + 2
    if opts.depth is not None:
        depth = opts.depth
    else:
        depth = max(need, depth_for_tolerance(dist, opts.tolerance))
    if depth < need:
        raise ConfigError(f"integrate.depth must be at least n_cells + 2 = {need}")
    if depth > cfg.group.depth_cap:
        raise DepthExceededError(f"integration depth {depth} exceeds depth_cap={cfg.group.depth_cap}")
    return depth


def cmd_integrate(cfg: RunConfig) -> Outcome:
    seq, dist = _setup(cfg)
    opts = cfg.integrate
    depth = _integration_depth(cfg, dist)
    est = estimate_total(seq, dist, opts.n_cells, opts.samples_per_cell, depth, cfg.seed,
                         cfg.workers, opts.growth_threshold, opts.stratified)
    result = est.to_dict()
    result["truncation_bound"] = 2.0 * dist.tail(depth)
    checks = []
    for c in est.cells:
        row = {"n": c.n, "above_half_measure": c.estimate >= c.measure / 2 - 3 * c.stderr}
        if c.n >= 1:
            row["lower_bound"] = cell_lower_bound(seq, dist, c.n)
            if dist.positive:
                row["upper_bound"] = cell_upper_bound(seq, dist, c.n)
        checks.append(row)
    result["cell_checks"] = checks
    unstable = [c.n for c in est.cells if c.unstable]
    result["unstable_cells"] = unstable
    notes = []
    if dist.finite_support and opts.n_cells > dist.max_index:
        # mu_hat = 1 is reachable inside these cells, so 1/(1 - mu_hat) is not integrable there
        notes.append(f"cells n > {dist.max_index} are not integrable for this finitely supported law; "
                     "their estimates are meaningless")
    result["notes"] = notes
    rows = [(c.n, c.measure, c.estimate, c.stderr, c.systematic_lo, c.systematic_hi) for c in est.cells]
    code = EXIT_OK
    if unstable:
        log.error("cells %s are unstable at depth %d; increase depth", unstable, depth)
        code = EXIT_DEPTH
    return Outcome(result, ("n", "m(E_n)", "estimate", "stderr", "systematic_lo", "systematic_hi"),
                   rows, code)


def cmd_simulate(cfg: RunConfig) -> Outcome:
    seq, dist = _setup(cfg)
    opts = cfg.simulate
    if not opts.horizons or min(opts.horizons) < 1 or opts.trials < 1:
        raise ConfigError("simulate needs trials >= 1 and horizons >= 1")
    if opts.contrast is not None:
        other = make_distribution(opts.contrast, seq)
        table = visit_count_contrast(seq, dist, other, opts.trials, opts.horizons, cfg.seed, cfg.workers)
        stats = table["stats_a"]
        result = {"stats": stats, "contrast": {
            "verdict_a": table["verdict_a"], "verdict_b": table["verdict_b"],
            "rows": table["rows"], "stats_b": table["stats_b"]}}
    else:
        stats = return_experiment(seq, dist, opts.trials, opts.horizons, cfg.seed, cfg.workers)
        result = {"stats": stats}
    result["caveat"] = stats.caveat
    rows = [(h.horizon, h.mean_visits, h.mean_ci[0], h.mean_ci[1]) for h in stats.curve]
    return Outcome(result, ("T", "mean_visits", "ci_lo", "ci_hi"), rows)


def cmd_partition(cfg: RunConfig) -> Outcome:
    seq = cfg.group
    opts = cfg.partition
    max_coord = opts.max_coord if opts.max_coord is not None else opts.n + 1
    measures = [cell_measure(seq, n) for n in range(opts.n + 1)]
    partial = telescoping_check(seq, opts.n)
    sums, acc = [], 0
    for m in measures:
        acc += m
        sums.append(acc)
    families = {
        str(n): {
            "cell": interval_family_json(emit_interval_family(seq, n, max_coord, "cell")),
            "remainder": interval_family_json(emit_interval_family(seq, n, max_coord, "remainder")),
        }
        for n in range(opts.n + 1)
    }
    alphas = [alpha_cell(seq, n, a) for a in opts.alphas for n in range(opts.n + 1)]
    result = {
        "measures": [{"n": n, "measure": m, "partial_sum": s} for n, (m, s) in enumerate(zip(measures, sums))],
        "partial_sum": partial,
        "residual_measure": 1 - partial,
        "interval_units": "multiples of pi",
        "interval_families": families,
        "alpha_cells": alphas,
    }
    rows = [(n, m, s) for n, (m, s) in enumerate(zip(measures, sums))]
    return Outcome(result, ("n", "measure", "partial_sum"), rows)


GEOMETRIC_TAIL_GRID = (0.01, 0.1, 1.0, 10.0)


def _direct_geometric_sum(a: float) -> float:
    k = np.arange(1, int(60 / a) + 2, dtype=float)
    return math.fsum(np.exp(-a * k) / np.sqrt(k))


def cmd_check_bounds(cfg: RunConfig) -> Outcome:
    seq, dist = _setup(cfg)
    opts = cfg.check_bounds
    reports = [bound_check_cosine(opts.grid_size)]
    for n in opts.cells:
        depth = min(seq.depth_cap, n + 24)
        rng = np.random.default_rng([cfg.seed, n])
        reports.append(bound_check_majorant(seq, dist, n, opts.samples, rng, depth))
        if n >= 1 and dist.tail(n) > 0:
            reports.append(bound_check_lower_chain(seq, dist, n, opts.samples,
                                                   np.random.default_rng([cfg.seed, n, 1]), depth))
    tail_rows = []
    for a in GEOMETRIC_TAIL_GRID:
        direct, bound = _direct_geometric_sum(a), geometric_series_tail(a)
        tail_rows.append({"a": a, "direct_sum": direct, "bound": bound, "holds": direct <= bound})
    violations = sum(r.violations for r in reports) + sum(not r["holds"] for r in tail_rows)
    result = {"checks": reports, "geometric_series_tail": tail_rows, "total_violations": violations}
    rows = [(r.inequality, r.applicable, r.samples, r.violations, r.worst_margin) for r in reports]
    return Outcome(result, ("inequality", "applicable", "samples", "violations", "worst_margin"), rows,
                   EXIT_VIOLATION if violations else EXIT_OK)


HANDLERS: dict[str, Callable[[RunConfig], Outcome]] = {
    "classify": cmd_classify,
    "integrate": cmd_integrate,
    "simulate": cmd_simulate,
    "partition": cmd_partition,
    "check-bounds": cmd_check_bounds,
}


def _configure_logging() -> None:
    level = os.environ.get("SOLENOID_WALK_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="solenoid-walk",
                                description="Recurrence of symmetric random walks on subgroups of Q.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--workers", type=int, help="overrides the config worker count")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"))
    return p


def run(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging()
    try:
        cfg = load_config(args.config, seed_override=args.seed)
        cfg = cfg.with_overrides(seed=args.seed, workers=args.workers, output=args.output, format=args.format)
        log.info("running %s with backend %s", args.command, kernels.BACKEND)
        start = time.perf_counter()
        outcome = HANDLERS[args.command](cfg)
        wall = time.perf_counter() - start
    except (ConfigError, DistributionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DepthExceededError as exc:
        print(f"depth error: {exc}", file=sys.stderr)
        return EXIT_DEPTH

    if cfg.output.format == "csv":
        text = csv_table(outcome.csv_header, outcome.csv_rows)
    else:
        report = make_report(args.command, cfg.to_dict(), outcome.result, __version__, kernels.BACKEND, wall)
        text = dumps_report(report)
    if cfg.output.path:
        with open(cfg.output.path, "w") as fh:
            fh.write(text)
        log.info("wrote %s", cfg.output.path)
    else:
        sys.stdout.write(text)
    return outcome.code


def main() -> None:
    sys.exit(run())
