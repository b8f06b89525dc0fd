"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

import argparse
import csv
import json
import logging
import sys

import numpy as np

from . import experiments, models
from .chains import load_chain, save_chain, stationary_distribution
from .costs import cost_chain_report, kldr_bracket
from .exceptions import (
    AbsorbingState,
    DimensionMismatch,
    EmptyText,
    InequalityViolation,
    InvalidConfig,
    InvalidRates,
    NotIrreducible,
    ParseError,
    SupportViolation,
    TooLarge,
    UnsupportedCost,
    WindowTooLarge,
)
from .projection import load_partition, save_partition
from .search import SearchConfig, agglomerative_aggregate, exhaustive_aggregate, sequential_aggregate

log = logging.getLogger("markagg")

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3
DATA_ERRORS = (
    ParseError, DimensionMismatch, InvalidConfig, UnsupportedCost, EmptyText, InvalidRates,
    WindowTooLarge, TooLarge, AbsorbingState, OSError, ValueError,
)
NUMERIC_ERRORS = (NotIrreducible, SupportViolation, InequalityViolation, FloatingPointError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    return [int(x) for x in text.split(",") if x]


def _float_list(text):
    return [float(x) for x in text.split(",") if x]


def _k_range(text):
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return _int_list(text)


def _dump(obj, path):
    text = json.dumps(obj, indent=1)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _emit_csv(result, path):
    if path in (None, "-"):
        result.to_csv(sys.stdout)
    else:
        with open(path, "w", newline="") as fh:
            result.to_csv(fh)


def cmd_stationary(args):
    chain = load_chain(args.chain)
    mu = stationary_distribution(chain)
    _dump({"n_states": chain.n_states, "stationary": mu.tolist()}, args.out)


def cmd_cost_eval(args):
    chain = load_chain(args.chain)
    g = load_partition(args.partition)
    reports = cost_chain_report(chain, g, args.order)
    report = reports[-1].to_dict()
    if args.tighten:
        report["kldr_upper_tightened"] = kldr_bracket(chain, g, args.order, tighten_to=args.tighten)[1]
    kinds = set(args.kinds.split(","))
    print(f"order k            : {args.order}")
    if "pred" in kinds:
        print(f"prediction cost    : {report['pred_cost']:.10g} bits")
    if "lump" in kinds:
        print(f"lumpability cost   : {report['lump_cost']:.10g} bits")
    print(f"KLDR bracket       : [{report['kldr_lower']:.10g}, {report['kldr_upper']:.10g}]")
    print(f"MAP predictor p_e  : {report['map_error']:.10g}")
    print(f"Fano slack         : {report['fano_slack']:.10g}")
    if args.json:
        _dump(report, args.json)


def cmd_aggregate(args):
    chain = load_chain(args.chain)
    cfg = SearchConfig(
        n_groups=args.groups, cost_kind=args.cost, order=args.order, restarts=args.restarts,
        max_sweeps=args.max_sweeps, seed=args.seed,
    )
    if args.algo == "seq":
        g, report, trace = sequential_aggregate(chain, cfg)
    elif args.algo == "agglo":
        g, report, trace = agglomerative_aggregate(chain, cfg)
    else:
        g, report = exhaustive_aggregate(chain, cfg)
        trace = None
    save_partition(g, args.out)
    if args.trace and trace is not None:
        with open(args.trace, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["step", "cost"])
            for row in trace.to_rows():
                writer.writerow([row["step"], format(row["cost"], ".12g")])
    if args.report:
        _dump(report.to_dict(), args.report)
    print(json.dumps({"labels": (g.labels + 1).tolist(), **report.to_dict()}))


def cmd_bigram_train(args):
    with open(args.corpus, encoding="utf-8") as fh:
        text = fh.read()
    text = models.preprocess_text(
        text, strip_linebreaks=args.strip_linebreaks, heading_pattern=args.strip_headings
    )
    model = models.bigram_train(text, smoothing=args.smoothing)
    save_chain(model.chain, args.out)
    if args.alphabet:
        _dump(model.alphabet, args.alphabet)
    print(f"{len(text)} characters, alphabet size {model.chain.n_states}")


def cmd_generate(args):
    if args.model == "toy":
        chain = models.gen_toy(args.p, args.epsilon, seed=args.seed)
        g = models.TOY_PRED_PARTITION
    elif args.model == "quasi-periodic":
        rng = np.random.default_rng(args.seed)
        P0, g = models.gen_quasi_periodic(args.block_size, rng)
        chain = models.perturb(P0, args.epsilon, models.random_stochastic(P0.shape[0], rng=rng))
    elif args.model == "block-stochastic":
        sizes = _int_list(args.blocks)
        A = np.array(json.loads(args.A)) if args.A else np.roll(np.eye(len(sizes)), 1, axis=1)
        chain, g = models.gen_block_stochastic(sizes, A, seed=args.seed)
        if args.epsilon > 0:
            chain = models.perturb(chain, args.epsilon, seed=args.seed + 1)
    else:
        rates = json.loads(args.rates) if args.rates else None
        rate_matrix, g = models.gen_maintenance(args.k, rates)
        chain = models.embed_jump_chain(rate_matrix)
        if args.rates_out:
            _dump(rate_matrix.to_dict(), args.rates_out)
    save_chain(chain, args.out, include_stationary=False)
    if args.partition_out:
        save_partition(g, args.partition_out)


def cmd_experiment(args):
    if args.experiment == "quasi-periodic":
        res = experiments.run_quasi_periodic(
            trials=args.trials, eps_grid=args.eps, orders=args.orders, seed=args.seed,
            restarts=args.restarts, n_jobs=args.jobs,
        )
        _emit_csv(res, args.csv)
    elif args.experiment == "maintenance":
        rates = json.loads(args.rates) if args.rates else None
        res = experiments.run_maintenance(
            k_values=args.k, rates=rates, orders=args.orders, restarts=args.restarts, seed=args.seed
        )
        _emit_csv(res, args.csv)
    else:
        with open(args.corpus, encoding="utf-8") as fh:
            text = fh.read()
        res = experiments.run_bigram(
            text, n_groups=args.groups, orders=args.orders, restarts=args.restarts, seed=args.seed,
            smoothing=args.smoothing,
        )
        print(res.table())
        for k, rep in res.reports.items():
            print(f"pred k={k}: cost {rep.pred_cost:.6f} bits, p_e {rep.map_error:.4f}")
        if res.reference_cost == res.reference_cost:
            print(f"reference partition (k=2): cost {res.reference_cost:.6f} bits")


def build_parser():
    p = _Parser(prog="markagg", description="Higher-order aggregation of Markov chains")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("stationary", help="stationary distribution of a chain file")
    s.add_argument("chain")
    s.add_argument("--out")
    s.set_defaults(func=cmd_stationary)

    s = sub.add_parser("cost-eval", help="evaluate all costs of a partition")
    s.add_argument("chain")
    s.add_argument("partition")
    s.add_argument("--order", "-k", type=int, default=1)
    s.add_argument("--kinds", default="pred,lump")
    s.add_argument("--tighten", type=int, help="tighten the KLDR upper bound to this order")
    s.add_argument("--json")
    s.set_defaults(func=cmd_cost_eval)

    s = sub.add_parser("aggregate", help="search a partition")
    s.add_argument("chain")
    s.add_argument("--algo", choices=["seq", "agglo", "exhaustive"], default="seq")
    s.add_argument("--cost", choices=["pred", "lump"], default="pred")
    s.add_argument("--order", "-k", type=int, default=1)
    s.add_argument("--groups", "-M", type=int, required=True)
    s.add_argument("--restarts", type=int, default=10)
    s.add_argument("--max-sweeps", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="partition.json")
    s.add_argument("--trace")
    s.add_argument("--report")
    s.set_defaults(func=cmd_aggregate)

    s = sub.add_parser("bigram-train", help="train a letter bi-gram chain")
    s.add_argument("corpus")
    s.add_argument("--out", default="bigram.json")
    s.add_argument("--alphabet")
    s.add_argument("--smoothing", type=float, default=1e-3)
    s.add_argument("--strip-linebreaks", action=argparse.BooleanOptionalAction, default=True)
    s.add_argument("--strip-headings", default=models.DEFAULT_HEADING_PATTERN,
                   help="regex for heading lines to drop ('' disables)")
    s.set_defaults(func=cmd_bigram_train)

    s = sub.add_parser("generate", help="write a model chain (and partition) to JSON")
    s.add_argument("model", choices=["toy", "quasi-periodic", "block-stochastic", "maintenance"])
    s.add_argument("--out", default="chain.json")
    s.add_argument("--partition-out")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--epsilon", type=float, default=0.0)
    s.add_argument("--p", type=float, default=0.5)
    s.add_argument("--block-size", type=int, default=10)
    s.add_argument("--blocks", default="3,3,3")
    s.add_argument("--A", help="JSON block-weight matrix (default: cyclic permutation)")
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--rates", help="JSON object of maintenance rates")
    s.add_argument("--rates-out")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("experiment", help="run a study")
    esub = s.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    e = esub.add_parser("quasi-periodic")
    e.add_argument("--trials", type=int, default=500)
    e.add_argument("--eps", type=_float_list, default=list(experiments.DEFAULT_EPS_GRID))
    e.add_argument("--orders", type=_int_list, default=[1, 2])
    e.add_argument("--restarts", type=int, default=1)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--jobs", type=int, default=1)
    e.add_argument("--csv")
    e = esub.add_parser("bigram")
    e.add_argument("corpus")
    e.add_argument("--groups", "-M", type=int, default=4)
    e.add_argument("--orders", type=_int_list, default=[1, 2])
    e.add_argument("--restarts", type=int, default=10)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--smoothing", type=float, default=1e-3)
    e = esub.add_parser("maintenance")
    e.add_argument("--k", type=_k_range, default=list(range(3, 8)))
    e.add_argument("--rates", help="JSON object of maintenance rates")
    e.add_argument("--orders", type=_int_list, default=[1, 2])
    e.add_argument("--restarts", type=int, default=10)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--csv")
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except NUMERIC_ERRORS as exc:
        print(f"markagg: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DATA_ERRORS as exc:
        print(f"markagg: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
