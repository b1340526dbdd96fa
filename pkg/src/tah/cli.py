"""Command-line interface.

Exit codes: 0 success, 2 unreadable or invalid input, 3 empty CFG, 4 I/O
failure while writing, 5 comparator failure, 6 duplicate corpus id,
7 corrupt corpus file.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .bench import format_table, time_comparator
from .cfg import CfgError, read_cfg
from .clustering import (
    COMPARATORS,
    DEFAULT_STEP,
    LINKAGES,
    ComparatorError,
    distance_matrix,
    threshold_sweep,
    write_cdf_csv,
    write_ranges_csv,
    write_report_csv,
)
from .corpus import CorpusError, DuplicateIdError, add_entry, load_corpus, scan
from .dataset import build_dataset, read_dataset, write_dataset
from .features import DEFAULT_N, extract_features
from .fuzzyhash import DEFAULT_BITS, ProjectionParams, encode_hash, hash_similarity, parse_seed, project, seed_from_env
from .similarity import ParameterMismatchError, exact_similarity

log = logging.getLogger("tah")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_EMPTY = 3
EXIT_IO = 4
EXIT_COMPARATOR = 5
EXIT_DUPLICATE = 6
EXIT_CORRUPT = 7


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _params(args) -> ProjectionParams:
    seed = parse_seed(args.seed) if args.seed else seed_from_env()
    return ProjectionParams(k=args.bits, seed=seed, n=args.n)


def _load(path: str, fmt: str):
    try:
        g = read_cfg(path, None if fmt == "auto" else fmt)
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}", EXIT_INPUT) from None
    except CfgError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT) from None
    if not g.nodes:
        raise CliError(f"{path}: CFG is empty", EXIT_EMPTY)
    return g


def _hash_file(path: str, args):
    params = _params(args)
    return project(extract_features(_load(path, args.format), params.n), params)


def cmd_hash(args) -> int:
    for path in args.inputs:
        h = _hash_file(path, args)
        print(encode_hash(h) if len(args.inputs) == 1 else f"{encode_hash(h)}  {path}")
    return EXIT_OK


def cmd_sig(args) -> int:
    sys.stdout.write(extract_features(_load(args.input, args.format), args.n).to_text())
    return EXIT_OK


def cmd_compare(args) -> int:
    if args.exact:
        a = extract_features(_load(args.a, args.format), args.n)
        b = extract_features(_load(args.b, args.format), args.n)
        value = exact_similarity(a, b)
    else:
        value = hash_similarity(_hash_file(args.a, args), _hash_file(args.b, args))
    print(f"{value:.6f}")
    return EXIT_OK


def cmd_gen(args) -> int:
    ds = build_dataset(args.groups, args.nodes, rng_seed=args.rng_seed, dedupe=args.dedupe, n=args.n)
    try:
        write_dataset(ds, args.out)
    except OSError as exc:
        raise CliError(f"{args.out}: {exc.strerror or exc}", EXIT_IO) from None
    print(f"wrote {len(ds)} CFGs in {len(ds.groups)} groups to {args.out}")
    return EXIT_OK


def _read_dataset(args):
    try:
        ds = read_dataset(args.dir)
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(f"{args.dir}: cannot read dataset: {exc}", EXIT_INPUT) from None
    if args.limit:
        ds = ds.stratified(args.limit)
    return ds


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(f"{path.stem}_{suffix}{path.suffix or '.csv'}")


def cmd_cluster(args) -> int:
    ds = _read_dataset(args)
    try:
        m = distance_matrix(ds.cfgs, args.comparator, _params(args), workers=args.workers)
    except (ComparatorError, ParameterMismatchError, RuntimeError) as exc:
        raise CliError(f"comparator {args.comparator} failed: {exc}", EXIT_COMPARATOR) from None
    report = threshold_sweep(m, ds, args.linkage, args.step)
    out = Path(args.report)
    try:
        write_report_csv(report, out)
        write_cdf_csv(report, _sibling(out, "cdf"))
        write_ranges_csv(report, _sibling(out, "ranges"))
    except OSError as exc:
        raise CliError(f"{out}: {exc.strerror or exc}", EXIT_IO) from None
    print(report.summary())
    return EXIT_OK


def cmd_corpus_add(args) -> int:
    h = _hash_file(args.cfg, args)
    try:
        add_entry(args.db, args.id, h)
    except DuplicateIdError as exc:
        raise CliError(str(exc), EXIT_DUPLICATE) from None
    except CorpusError as exc:
        raise CliError(f"{args.db}: {exc}", EXIT_CORRUPT) from None
    except OSError as exc:
        raise CliError(f"{args.db}: {exc.strerror or exc}", EXIT_IO) from None
    return EXIT_OK


def cmd_corpus_scan(args) -> int:
    query = _hash_file(args.cfg, args)
    try:
        entries = load_corpus(args.db, query.params)
    except CorpusError as exc:
        raise CliError(f"{args.db}: {exc}", EXIT_CORRUPT) from None
    try:
        hits = scan(entries, query, args.threshold)
    except ParameterMismatchError as exc:
        raise CliError(str(exc), EXIT_COMPARATOR) from None
    for sim, entry in hits:
        print(f"{sim:.6f}\t{entry.id}")
    return EXIT_OK


def cmd_bench(args) -> int:
    ds = _read_dataset(args)
    params = _params(args)
    timings = []
    for name in args.comparators.split(","):
        try:
            timings.append(time_comparator(ds.cfgs, name.strip(), params, uncached=not args.no_uncached))
        except (ValueError, RuntimeError) as exc:
            raise CliError(f"comparator {name} failed: {exc}", EXIT_COMPARATOR) from None
    print(format_table(timings))
    return EXIT_OK


def _add_hash_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=DEFAULT_N, help="maximum n-gram length (default %(default)s)")
    p.add_argument("--bits", type=int, default=DEFAULT_BITS, help="projection bits k (default %(default)s)")
    p.add_argument("--seed", help="projection seed in hex (default: $TAH_SEED or the built-in constant)")
    p.add_argument("--format", choices=("auto", "json", "edgelist"), default="auto",
                   help="input format; auto picks json for *.json files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tah", description="Topology-aware hashing of control flow graphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hash", help="print the fuzzy hash of CFG files")
    p.add_argument("inputs", nargs="+")
    _add_hash_flags(p)
    p.set_defaults(func=cmd_hash)

    p = sub.add_parser("sig", help="print the graph signature of a CFG file")
    p.add_argument("input")
    _add_hash_flags(p)
    p.set_defaults(func=cmd_sig)

    p = sub.add_parser("compare", help="similarity of two CFG files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--exact", action="store_true", help="compare graph signatures instead of hashes")
    _add_hash_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gen", help="generate a ground-truth dataset")
    p.add_argument("--nodes", type=int, default=20)
    p.add_argument("--groups", type=int, default=5)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--dedupe", action="store_true", help="drop variants whose signature repeats within a group")
    p.add_argument("--n", type=int, default=DEFAULT_N, help=argparse.SUPPRESS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    for name, func, help_text in (
        ("cluster", cmd_cluster, "cluster a dataset and sweep thresholds"),
        ("bench", cmd_bench, "time comparators over all pairs of a dataset"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--dir", required=True)
        p.add_argument("--limit", type=int, default=100 if name == "bench" else None,
                       help="use an evenly spread subset of this many items")
        _add_hash_flags(p)
        p.set_defaults(func=func)
    cluster, bench = sub.choices["cluster"], sub.choices["bench"]
    cluster.add_argument("--comparator", choices=("tah", "exact", "tah_exact", "mcs"), default="tah")
    cluster.add_argument("--linkage", choices=LINKAGES, default="average")
    cluster.add_argument("--step", type=float, default=DEFAULT_STEP)
    cluster.add_argument("--report", default="report.csv")
    cluster.add_argument("--workers", type=int, default=1)
    bench.add_argument("--comparators", default=",".join(COMPARATORS))
    bench.add_argument("--no-uncached", action="store_true", help="skip the per-pair regeneration timing")

    p = sub.add_parser("corpus", help="persistent hash corpus")
    csub = p.add_subparsers(dest="corpus_command", required=True)
    add = csub.add_parser("add", help="hash a CFG and append it to the corpus")
    add.add_argument("id")
    add.add_argument("cfg")
    add.add_argument("--db", default="corpus.jsonl")
    _add_hash_flags(add)
    add.set_defaults(func=cmd_corpus_add)
    sc = csub.add_parser("scan", help="list corpus entries similar to a CFG")
    sc.add_argument("cfg")
    sc.add_argument("--threshold", type=float, default=0.5)
    sc.add_argument("--db", default="corpus.jsonl")
    _add_hash_flags(sc)
    sc.set_defaults(func=cmd_corpus_scan)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"tah: {exc}", file=sys.stderr)
        return exc.code
    except ValueError as exc:
        print(f"tah: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
