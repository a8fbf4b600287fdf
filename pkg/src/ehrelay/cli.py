"""Command-line entry point: ``ehrelay <verb> --config PATH [options]``.

Every verb writes CSV (to ``--out`` or stdout). Floats are rendered with
``repr`` so values round-trip exactly, and every command is deterministic
given its inputs and seed.

Exit codes: 0 success, 1 usage or parse error, 2 unstable regime (analyze).
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .analysis.performance import RATE_GRID, optimal_rate, steady_state
from .config import ConfigError, load_config, load_sweep
from .errors import Unstable
from .sim.engine import DEFAULT_WARMUP, HIST_BINS_PER_M, HIST_RANGE_M, run

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_USAGE", "EXIT_UNSTABLE"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNSTABLE = 2

DEFAULT_SEED = 42
DEFAULT_SLOTS = 1_000_000

ANALYZE_HEADER = ("p1", "p2", "p3", "p4", "psi1", "psi2", "b1", "b2", "q1", "q2",
                  "pr_b1_ge", "pr_b2_ge", "op", "throughput")
COMPARE_HEADER = ("quantity", "theory", "sim", "abs_diff", "stderr")
COMPARE_QUANTITIES = ("p1", "p2", "p3", "p4", "pr_b1_ge", "pr_b2_ge", "op", "throughput")
SWEEP_HEADER = ("swept_param", "value", "op_theory", "op_sim", "thr_theory", "thr_sim",
                "p1_theory", "p2_theory", "p3_theory", "p4_theory", "psi1", "psi2", "stable_flag")
SIMULATE_HEADER = ("quantity", "value", "stderr")
PDF_HEADER = ("x", "g_theory", "g_empirical")
OPTIMAL_HEADER = ("r0_star", "throughput", "at_boundary")
OPTIMAL_TABLE_HEADER = ("r0", "throughput", "stable_flag")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _count(text: str) -> int:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x.is_integer() or x < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return int(x)


def _seed(text: str) -> int:
    v = _count(text)
    if v >= 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


# ---------------------------------------------------------------- commands

def _report_or_none(config):
    try:
        return steady_state(config)
    except Unstable:
        return None


def cmd_analyze(args) -> tuple[str, int]:
    config = load_config(args.config)
    try:
        rep = steady_state(config)
    except Unstable as exc:
        print(f"unstable: {exc}", file=sys.stderr)
        return "", EXIT_UNSTABLE
    row = (*rep.p.p, rep.psi1, rep.psi2, rep.b1, rep.b2, rep.pdf1.q, rep.pdf2.q,
           rep.pr_b1_ge, rep.pr_b2_ge, rep.op, rep.throughput)
    return _csv(ANALYZE_HEADER, [row]), EXIT_OK


def _sim_values(stats) -> dict[str, tuple[float, float]]:
    out = {f"p{i + 1}": (stats.cbn_freq[i], stats.cbn_stderr[i]) for i in range(4)}
    out["pr_b1_ge"] = (stats.pr_b1_ge_emp, stats.pr_b1_ge_stderr)
    out["pr_b2_ge"] = (stats.pr_b2_ge_emp, stats.pr_b2_ge_stderr)
    out["op"] = (stats.op_emp, stats.op_stderr)
    out["throughput"] = (stats.throughput_emp, stats.throughput_stderr)
    return out


def _theory_values(rep) -> dict[str, float]:
    out = {f"p{i + 1}": float(rep.p.p[i]) for i in range(4)}
    out.update(pr_b1_ge=rep.pr_b1_ge, pr_b2_ge=rep.pr_b2_ge, op=rep.op, throughput=rep.throughput)
    return out


def _check_counts(args):
    if args.slots <= args.warmup:
        raise UsageError("--slots must exceed --warmup")


def cmd_simulate(args) -> tuple[str, int]:
    config = load_config(args.config)
    _check_counts(args)
    stats = run(config, seed=args.seed, n_slots=args.slots, warmup=args.warmup)
    vals = _sim_values(stats)
    rows = [(q, *vals[q]) for q in COMPARE_QUANTITIES]
    for relay in (1, 2):
        sums = stats.b1_sum_batches if relay == 1 else stats.b2_sum_batches
        means = sums / stats.batch_sizes
        rows.append((f"mean_b{relay}", sums.sum() / stats.n_stat,
                     float(np.std(means, ddof=1) / np.sqrt(len(means))) if len(means) > 1 else None))
    return _csv(SIMULATE_HEADER, rows), EXIT_OK


def cmd_compare(args) -> tuple[str, int]:
    config = load_config(args.config)
    _check_counts(args)
    rep = _report_or_none(config)
    stats = run(config, seed=args.seed, n_slots=args.slots, warmup=args.warmup)
    sim = _sim_values(stats)
    theory = _theory_values(rep) if rep is not None else {}
    rows = []
    for q in COMPARE_QUANTITIES:
        s, se = sim[q]
        t = theory.get(q)
        rows.append((q, t, s, None if t is None else abs(t - s), se))
    return _csv(COMPARE_HEADER, rows), EXIT_OK


def _sweep_point(task):
    index, value, config, seed, slots, warmup = task
    rep = _report_or_none(config)
    stats = run(config, seed=seed + index, n_slots=slots, warmup=warmup)
    if rep is None:
        theory = (None, None, None, None, None, None, None, None)
    else:
        theory = (rep.op, rep.throughput, *rep.p.p, rep.psi1, rep.psi2)
    op_t, thr_t, p1, p2, p3, p4, psi1, psi2 = theory
    return index, (value, op_t, stats.op_emp, thr_t, stats.throughput_emp,
                   p1, p2, p3, p4, psi1, psi2, rep is not None)


def cmd_sweep(args) -> tuple[str, int]:
    spec = load_sweep(args.config)
    _check_counts(args)
    tasks = [(i, v, c, args.seed, args.slots, args.warmup) for i, (v, c) in enumerate(spec.configs())]
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    results.sort(key=lambda r: r[0])
    rows = [(spec.param, *row) for _, row in results]
    return _csv(SWEEP_HEADER, rows), EXIT_OK


def cmd_pdf(args) -> tuple[str, int]:
    config = load_config(args.config)
    _check_counts(args)
    rep = steady_state(config)
    pdf = rep.pdf1 if args.relay == 1 else rep.pdf2
    stats = run(config, seed=args.seed, n_slots=args.slots, warmup=args.warmup)
    _, dens = stats.density(args.relay)
    edges = stats.hist_edges(args.relay)[:-1]
    n = int(round(args.xmax * HIST_BINS_PER_M))
    rows = [(float(x), pdf(float(x)), float(d)) for x, d in zip(edges[:n], dens[:n])]
    return _csv(PDF_HEADER, rows), EXIT_OK


def cmd_optimal_rate(args) -> tuple[str, int]:
    config = load_config(args.config)
    if not (args.r0_step > 0 and 0 < args.r0_start <= args.r0_stop):
        raise UsageError("need 0 < --r0-start <= --r0-stop and --r0-step > 0")
    res = optimal_rate(config, (args.r0_start, args.r0_stop, args.r0_step))
    if args.table:
        rows = [(float(r), float(v) if np.isfinite(v) else None, bool(np.isfinite(v)))
                for r, v in zip(res.grid, res.grid_throughput)]
        return _csv(OPTIMAL_TABLE_HEADER, rows), EXIT_OK
    return _csv(OPTIMAL_HEADER, [(res.r0_star, res.throughput, res.at_boundary)]), EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ehrelay", description="Energy-harvesting two-relay network: theory and simulation.")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def common(p, config_help="network config file"):
        # every verb takes the same flags; theory-only verbs ignore the simulation ones
        p.add_argument("--config", required=True, metavar="PATH", help=config_help)
        p.add_argument("--out", metavar="PATH", help="write CSV here instead of stdout")
        p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
        p.add_argument("--slots", type=_count, default=DEFAULT_SLOTS,
                       help="total simulated slots, warmup included")
        p.add_argument("--warmup", type=_count, default=DEFAULT_WARMUP)

    p = sub.add_parser("analyze", help="steady-state theory, one CSV row")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="Monte-Carlo statistics")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="theory next to simulation")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="one-parameter sweep, theory and simulation per point")
    common(p, config_help="sweep spec file")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (output order is fixed)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pdf", help="limiting buffer density against a simulated histogram")
    common(p)
    p.add_argument("--relay", type=int, choices=(1, 2), default=1)
    p.add_argument("--xmax", type=float, default=float(HIST_RANGE_M),
                   help=f"grid extent in units of M (at most {HIST_RANGE_M})")
    p.set_defaults(func=cmd_pdf)

    p = sub.add_parser("optimal-rate", help="throughput-maximizing R0")
    common(p)
    p.add_argument("--r0-start", type=float, default=RATE_GRID[0])
    p.add_argument("--r0-stop", type=float, default=RATE_GRID[1])
    p.add_argument("--r0-step", type=float, default=RATE_GRID[2])
    p.add_argument("--table", action="store_true", help="emit the whole grid instead of the optimum")
    p.set_defaults(func=cmd_optimal_rate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "xmax", None) is not None and not 0 < args.xmax <= HIST_RANGE_M:
        parser.error(f"--xmax must lie in (0, {HIST_RANGE_M}]")
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be >= 1")
    try:
        text, code = args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Unstable as exc:
        print(f"unstable: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE if args.verb == "analyze" else EXIT_USAGE
    if text:
        if args.out:
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
