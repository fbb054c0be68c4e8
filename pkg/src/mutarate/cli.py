"""Command-line entry point.

One subcommand per stage plus `pipeline` for the whole chain.  Options come
from three layers: built-in defaults, then a JSON config file (--config),
then explicit flags; later layers win.  Exit codes: 0 success, 2 bad
configuration, 3 bad or missing data, 4 numeric failure (saturated
distances and the like).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields

from . import __version__
from .errors import ConfigError, DataError, MutarateError, SaturationError
from .pipeline import (
    PipelineConfig,
    load_config_file,
    run_pipeline,
    stage_align,
    stage_distances,
    stage_fetch,
    stage_rate,
    stage_report,
    stage_score,
    stage_select,
    stage_train,
    stage_tree,
)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("configuration")
    g.add_argument("--config", metavar="FILE", help="JSON config file; flags override it")
    g.add_argument("--manifest", metavar="FILE", help="dataset manifest TSV (default: bundled)")
    g.add_argument("--fasta", metavar="FILE", help="sequence FASTA (default: snapshot or bundled)")
    g.add_argument("--snapshot-dir", dest="snapshot_dir", metavar="DIR",
                   help="per-accession FASTA cache used before any fetch")
    g.add_argument("--endpoint", metavar="URL", help="GenBank efetch-style endpoint")
    g.add_argument("--out", metavar="DIR", help="output directory (default: out)")
    g.add_argument("--seed", type=int, help="recorded in the run report")
    g.add_argument("--match", type=float, help="alignment match score")
    g.add_argument("--mismatch", type=float, help="alignment mismatch score")
    g.add_argument("--gap-open", dest="gap_open", type=float, help="gap opening score")
    g.add_argument("--gap-extend", dest="gap_extend", type=float, help="gap extension score")
    g.add_argument("--pseudocount", type=float, help="training pseudocount")
    g.add_argument("--gap-threshold", dest="gap_threshold", type=float,
                   help="max gap fraction for a match column")
    g.add_argument("--ll-tolerance", dest="ll_tolerance", type=float,
                   help="log-likelihood convergence tolerance")
    g.add_argument("--max-iterations", dest="max_iterations", type=int,
                   help="training iteration cap")
    g.add_argument("--model-length", dest="model_length", type=int,
                   help="force the number of match states")
    g.add_argument("--tree-method", dest="tree_method", help="distance method for the tree (default jc)")
    g.add_argument("--rate-method", dest="rate_method", help="distance method for the rate fit (default kimura)")
    g.add_argument("--degree", type=int, help="regression polynomial degree (default 1)")
    g.add_argument("--reference-year", dest="reference_year", type=int,
                   help="override the reference year (default: earliest)")
    g.add_argument("--reference-date", dest="reference_date", metavar="YYYY-MM-DD",
                   help="override the reference date (default: March 23 of the reference year)")
    g.add_argument("--no-reference-origin", dest="include_reference", action="store_const",
                   const=False, default=None,
                   help="do not add the (0, 0) reference point to the fit")

    parser = argparse.ArgumentParser(
        prog="mutarate",
        description="Estimate a virus lineage's mutation rate from year-tagged sequences.",
    )
    parser.add_argument("--version", action="version", version=f"mutarate {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("pipeline", parents=[common],
                   help="run every stage in order and write the run report")
    sub.add_parser("fetch", parents=[common],
                   help="download manifest accessions into the snapshot dir")
    sub.add_parser("align", parents=[common],
                   help="per-year progressive alignment and ambiguity resolution")
    sub.add_parser("train", parents=[common],
                   help="train one profile model per year from the resolved alignments")
    p_score = sub.add_parser("score", parents=[common],
                             help="log-odds score every sequence against its year model")
    p_score.add_argument("--lengths", metavar="N,N,...",
                         help="also sweep these model lengths into sweep_<year>.tsv")
    sub.add_parser("select", parents=[common],
                   help="pick each year's best-scoring sequence")
    p_dist = sub.add_parser("distances", parents=[common],
                            help="pairwise distance matrices between representatives")
    p_dist.add_argument("--method", help="write only this method's matrix")
    sub.add_parser("tree", parents=[common],
                   help="neighbor-joining tree, plus a copy rerooted at the reference year")
    sub.add_parser("rate", parents=[common],
                   help="distance-versus-time fit with a 95%% confidence band")
    sub.add_parser("report", parents=[common],
                   help="rebuild run_report.json from the artifacts present")
    return parser


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    data: dict = {}
    if getattr(args, "config", None):
        data.update(load_config_file(args.config))
    for f in fields(PipelineConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            data[f.name] = value
    return PipelineConfig.from_dict(data)


def _parse_lengths(text: str | None) -> list[int] | None:
    if not text:
        return None
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"--lengths expects comma-separated integers, got {text!r}")


def _dispatch(args: argparse.Namespace) -> None:
    cfg = _config_from_args(args)
    if args.command == "pipeline":
        report = run_pipeline(cfg)
        for year, info in sorted(report.representatives.items()):
            print(f"{year}: {info['label']} ({info['accession']}) score {info['score']}")
        rate = report.events.get("rate_per_day")
        if rate is not None:
            print(f"rate: {rate:.6e} per day ({rate * 365.25:.6e} per year)")
        print(f"artifacts in {cfg.out}")
    elif args.command == "fetch":
        summary = stage_fetch(cfg)
        print(
            f"fetched {len(summary['fetched'])}, "
            f"from snapshot {len(summary['from_snapshot'])}"
        )
    elif args.command == "align":
        result = stage_align(cfg)
        for year, n in sorted(result["ambiguity_replacements"].items()):
            print(f"{year}: aligned; {n} ambiguity code(s) resolved")
    elif args.command == "train":
        result = stage_train(cfg)
        for year, n in sorted(result["em_iterations"].items()):
            length = result["model_lengths"][year]
            print(f"{year}: model length {length}, {n} iteration(s)")
    elif args.command == "score":
        stage_score(cfg, lengths=_parse_lengths(args.lengths))
        print(f"wrote scores to {cfg.out}")
    elif args.command == "select":
        result = stage_select(cfg)
        for year, label in sorted(result["representatives"].items()):
            print(f"{year}: {label}")
    elif args.command == "distances":
        stage_distances(cfg, only_method=args.method)
        print(f"wrote distance matrices to {cfg.out}")
    elif args.command == "tree":
        stage_tree(cfg)
        print(f"wrote tree_nj.newick and tree_rerooted.newick to {cfg.out}")
    elif args.command == "rate":
        result = stage_rate(cfg)
        rate = result["rate_per_day"]
        print(f"rate: {rate:.6e} per day ({rate * 365.25:.6e} per year)")
    elif args.command == "report":
        stage_report(cfg)
        print(f"wrote run_report.json to {cfg.out}")
    else:  # pragma: no cover - argparse enforces the choices
        raise ConfigError(f"unknown command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _dispatch(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SaturationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except MutarateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
