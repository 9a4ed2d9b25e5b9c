"""Command line entry point: ``queryevo {run,weights,curves,search}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .corpus import Tokenizer, load_corpus, load_stopwords
from .runner import (
    CURVE_MODES,
    compute_curves,
    load_config,
    read_log,
    run_experiment,
    write_curves,
    write_log,
)
from .search import CorpusSearcher
from .weights import REPORT_HEADER, RadiusConfig, parse_range, report_row, weights_for_range

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _radius_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--xi", type=float, nargs=3, metavar=("XI_G", "XI_P", "XI_S"), default=None)
    p.add_argument("--variant", choices=("direct", "inverse"), default="direct")
    p.add_argument("--s-column", choices=("raw", "normalized"), default="raw")


def _radius_cfg(args) -> RadiusConfig:
    xi = args.xi or (0.33, 0.33, 0.34)
    return RadiusConfig(*xi, variant=args.variant)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="queryevo", description="Evolve search queries with a genetic algorithm.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run an experiment and write log + curves")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--generations", type=int)
    run.add_argument("--out", default=".", help="output directory (default: current)")
    run.add_argument("--mode", choices=CURVE_MODES, help="curve mode (default: from config)")

    w = sub.add_parser("weights", help="compute a weight report row from a log")
    w.add_argument("--log", required=True)
    w.add_argument("--method", choices=("equal", "spread", "radius"), required=True)
    w.add_argument("--range", dest="data_range", default="all", help="query:P:Q, population:P or all")
    w.add_argument("--header", action="store_true", help="print the report header first")
    _radius_args(w)

    c = sub.add_parser("curves", help="compute W_equ/W_dis/W_rad curves from a log")
    c.add_argument("--log", required=True)
    c.add_argument("--mode", choices=CURVE_MODES, default="per-population")
    c.add_argument("--out", help="curve CSV path (default: stdout)")
    _radius_args(c)

    s = sub.add_parser("search", help="run one query against a corpus")
    s.add_argument("--corpus", required=True)
    s.add_argument("--stopwords")
    s.add_argument("--max-results", type=int, default=20)
    s.add_argument("terms", nargs="+")
    return parser


def _cmd_run(args) -> None:
    cfg = load_config(args.config, seed=args.seed, generations=args.generations)
    mode = args.mode or cfg.curve_mode
    log = run_experiment(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_log(log, out / "log.csv")
    points = compute_curves(log, cfg.radius_config(), mode, cfg.s_column)
    write_curves(points, out / "curves.csv")
    print(f"{len(log.records)} records over {len(points)} populations written to {out}")


def _cmd_weights(args) -> None:
    log = read_log(args.log)
    rng = parse_range(args.data_range)
    cfg = _radius_cfg(args)
    w = weights_for_range(log, rng, args.method, cfg, args.s_column)
    if args.header:
        print(REPORT_HEADER)
    print(report_row(args.method, rng, w, cfg))


def _cmd_curves(args) -> None:
    log = read_log(args.log)
    points = compute_curves(log, _radius_cfg(args), args.mode, args.s_column)
    if args.out:
        write_curves(points, args.out)
    else:
        print("population_no,W_equ,W_dis,W_rad")
        for p in points:
            print(f"{p.population_no},{p.W_equ!r},{p.W_dis!r},{p.W_rad!r}")


def _cmd_search(args) -> None:
    stopwords = load_stopwords(args.stopwords) if args.stopwords else frozenset()
    corpus = load_corpus(args.corpus, Tokenizer(stopwords))
    for r in CorpusSearcher(corpus).search(args.terms, args.max_results):
        print(f"{r.position}\t{r.doc_id}\t{corpus[r.doc_id].title}")


COMMANDS = {"run": _cmd_run, "weights": _cmd_weights, "curves": _cmd_curves, "search": _cmd_search}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"queryevo: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
