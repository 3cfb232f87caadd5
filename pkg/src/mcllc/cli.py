"""Command line entry point.

    mcllc generate   --seed 7 --index 0 -o ts.json
    mcllc allocate   ts.json --strategy Manberg -o alloc.json
    mcllc analyze    ts.json alloc.json
    mcllc experiment config.json --out results/
    mcllc report     results/util_summary.csv --out plots/

The worker count for ``experiment`` comes from the MCLLC_WORKERS variable.
"""

import argparse
import json
import logging
import sys
from dataclasses import replace

from . import __version__
from ._kernels import BACKEND
from .alloc import STRATEGIES, strategy_allocate
from .experiment import WORKERS_ENV, ExperimentConfig, run_experiment, write_plot_data
from .model import allocation_from_dict, allocation_to_dict, dump_json, load_taskset, taskset_to_dict
from .partition import partition, verify
from .workload import GenParams, derive_seeds, gen_taskset


def _emit(doc, path):
    text = dump_json(doc, path)
    if path is None:
        sys.stdout.write(text)


def cmd_generate(args):
    params = GenParams(
        n=args.n, utilisation=args.utilisation, fraction_hi=args.fraction_hi,
        wcet_ratio=args.wcet_ratio, alpha=args.alpha, lam=args.lam,
        cache_kb=args.cache_kb, page_kb=args.page_kb, cores=args.cores,
        ticks_per_ms=args.ticks_per_ms, seeds=derive_seeds(args.seed, args.index),
    )
    _emit(taskset_to_dict(gen_taskset(params)), args.output)
    return 0


def cmd_allocate(args):
    ts = load_taskset(args.taskset)
    alloc = strategy_allocate(ts, args.strategy)
    if alloc is None:
        print(f"strategy {args.strategy}: no feasible allocation", file=sys.stderr)
        return 1
    _emit(allocation_to_dict(alloc, ts), args.output)
    return 0


def cmd_analyze(args):
    ts = load_taskset(args.taskset)
    with open(args.allocation) as fh:
        alloc = allocation_from_dict(json.load(fh))
    alloc.validate(ts)
    part = partition(ts, alloc)
    doc = part.to_dict()
    if part.success:
        doc["verdicts"] = [
            {"schedulable": v.schedulable, "violating_length": v.violating_length,
             "violating_mode": v.violating_mode}
            for v in verify(ts, part, exhaustive=args.exhaustive)
        ]
    _emit(doc, args.output)
    return 0 if part.success else 2


def cmd_experiment(args):
    config = ExperimentConfig.load(args.config)
    if args.seed is not None:
        config = replace(config, base_seed=args.seed)
    if args.tasksets is not None:
        config = replace(config, tasksets_per_point=args.tasksets)
    result = run_experiment(config, out_dir=args.out)
    for row in result.summary:
        print(f"{row['param_value']}\t{row['strategy']}\t{row['weighted_schedulability']}")
    return 0


def cmd_report(args):
    for path in args.summaries:
        for out in write_plot_data(path, args.out):
            print(out)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="mcllc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND})")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="emit one synthetic task set as JSON")
    d = GenParams()
    g.add_argument("--n", type=int, default=d.n)
    g.add_argument("--utilisation", type=float, default=d.utilisation,
                   help="nominal L-mode utilisation per core")
    g.add_argument("--fraction-hi", type=float, default=d.fraction_hi)
    g.add_argument("--wcet-ratio", type=float, default=d.wcet_ratio)
    g.add_argument("--alpha", type=float, default=d.alpha)
    g.add_argument("--lam", type=float, default=d.lam)
    g.add_argument("--cache-kb", type=int, default=d.cache_kb)
    g.add_argument("--page-kb", type=int, default=d.page_kb)
    g.add_argument("--cores", type=int, default=d.cores)
    g.add_argument("--ticks-per-ms", type=int, default=d.ticks_per_ms)
    g.add_argument("--seed", type=int, default=1, help="base seed")
    g.add_argument("--index", type=int, default=0, help="task set index under the base seed")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("allocate", help="cache pages for one strategy")
    a.add_argument("taskset")
    a.add_argument("--strategy", default="Manberg",
                   choices=list(STRATEGIES) + ["Z-Ekb", "E-Ekb", "N-Ekb"])
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_allocate)

    z = sub.add_parser("analyze", help="partition, scale deadlines and check every core")
    z.add_argument("taskset")
    z.add_argument("allocation")
    z.add_argument("--exhaustive", action="store_true",
                   help="re-check every integer interval length")
    z.add_argument("-o", "--output")
    z.set_defaults(func=cmd_analyze)

    e = sub.add_parser("experiment", help="run a parameter sweep from a JSON config",
                       epilog=f"workers: set {WORKERS_ENV} (default 1)")
    e.add_argument("config")
    e.add_argument("--out", default=".")
    e.add_argument("--seed", type=int, help="override the config's base seed")
    e.add_argument("--tasksets", type=int, help="override task sets per point")
    e.set_defaults(func=cmd_experiment)

    r = sub.add_parser("report", help="split summary CSVs into per-curve plot data")
    r.add_argument("summaries", nargs="+")
    r.add_argument("--out", default=".")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
