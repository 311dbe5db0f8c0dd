"""islandcg command line.

Commands::

    islandcg extract --dialect cpp --out facts dumps/*.ast
    islandcg link --root main --dot graph.dot --edges edges.csv facts/
    islandcg graph --root main dumps/            # extract + link in one process
    islandcg compare [--baseline-mode] facts_a facts_b
    islandcg bench dumps/*.ast

Exit codes: 0 success, 1 usage or configuration error, 2 I/O error.
Warnings go to standard error as ``WARN <file>:<detail>``.
"""

from __future__ import annotations

import argparse
import functools
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Optional, Sequence

from pydantic import ValidationError

from logic.call_extractor import extract_facts
from logic.call_index import FactIndex
from logic.evaluation import FEATURES, baseline_view, bench, program_metrics
from logic.file_tools import (
    discover_fact_pairs,
    expand_inputs,
    output_dirs,
    read_dump,
    source_name,
)
from logic.graph_linker import (
    UnknownRootError,
    build_tree,
    compare_metrics,
    default_root,
    merge,
    write_edges,
)
from logic.island_lexer import LexiconError, load_lexicon
from models.fact_models import ExtractionResult, LexiconTable
from models.graph_models import BenchReport, GraphMetrics, MetricsDelta, RunConfig
from services.dot_emitter import emit_dot, write_dot
from services.fact_store import FactFileError, read_facts, write_facts
from utils import config

logger = logging.getLogger("islandcg")
warn_log = logging.getLogger("islandcg.warn")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2


def configure_logging(level: str = config.LOG_LEVEL) -> None:
    """Set up root logging and the ``WARN <file>:<detail>`` channel.

    Each call binds a new warning handler to the current ``sys.stderr``.
    """
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(levelname)s %(name)s: %(message)s",
    )
    for old in list(warn_log.handlers):
        warn_log.removeHandler(old)
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter("WARN %(message)s"))
    warn_log.addHandler(handler)
    warn_log.propagate = False
    warn_log.setLevel(logging.WARNING)


def _warn(source: str, detail: str) -> None:
    warn_log.warning("%s:%s", source, detail)


def _report_extraction(result: ExtractionResult) -> None:
    for fact in result.facts:
        if fact.warning:
            _warn(fact.file, f"{fact.caller_scope}: {fact.warning}")


def _exit_codes(func: Callable[[RunConfig], int]) -> Callable[[RunConfig], int]:
    """Map library errors raised by a command to exit codes."""

    @functools.wraps(func)
    def wrapper(cfg: RunConfig) -> int:
        try:
            return func(cfg)
        except (LexiconError, FactFileError, UnknownRootError, ValidationError) as err:
            logger.error("%s", err)
            return EXIT_USAGE
        except OSError as err:
            logger.error("%s", err)
            return EXIT_IO

    return wrapper


# --- pipeline steps -----------------------------------------------------------


def _extract_one(path: Path, lexicon: LexiconTable) -> ExtractionResult:
    return extract_facts(read_dump(path), source_name(path), lexicon)


def extract_all(inputs: Sequence[Path], lexicon: LexiconTable) -> list[ExtractionResult]:
    """Extract every dump, several files at a time; results keep input order."""
    with ThreadPoolExecutor(max_workers=config.EXTRACT_WORKERS) as pool:
        return list(pool.map(lambda path: _extract_one(path, lexicon), inputs))


def load_index(inputs: Sequence[Path]) -> FactIndex:
    """Read every fact pair under ``inputs`` and merge them."""
    results = [read_facts(pair) for pair in discover_fact_pairs(inputs)]
    return merge(results)


def _link(index: FactIndex, cfg: RunConfig) -> int:
    for note in index.warnings:
        _warn("link", note)
    notes: list[str] = []
    tree = build_tree(
        index, cfg.root, max_depth=cfg.max_depth, max_nodes=cfg.max_nodes, warnings=notes
    )
    for note in notes:
        _warn("link", note)
    dot_path = write_dot(emit_dot(tree), cfg.dot_path or Path("graph.dot"))
    edges_path = write_edges(tree, cfg.edges_path or Path("edges.csv"))
    nodes = sum(1 for _ in tree.walk())
    print(f"{tree.qualified.display}: {nodes} nodes -> {dot_path}, {edges_path}")
    return EXIT_OK


# --- commands -----------------------------------------------------------------


@_exit_codes
def run_extract(cfg: RunConfig) -> int:
    """Write ``calls.csv``/``defs.csv`` for every input dump under ``cfg.out_dir``."""
    lexicon = load_lexicon(cfg.dialect)
    inputs = expand_inputs(cfg.inputs)
    results = extract_all(inputs, lexicon)
    for path, result, out_dir in zip(inputs, results, output_dirs(inputs, cfg.out_dir)):
        write_facts(result, out_dir)
        print(
            f"{path.name}: {len(result.facts)} facts, {len(result.defs)} defs, "
            f"{len(result.warnings)} warnings"
        )
        _report_extraction(result)
    return EXIT_OK


@_exit_codes
def run_link_graph(cfg: RunConfig) -> int:
    """Link fact files (``link``) or dumps (``graph``) and write DOT and edges."""
    if cfg.command == "graph":
        lexicon = load_lexicon(cfg.dialect)
        results = extract_all(expand_inputs(cfg.inputs), lexicon)
        for result in results:
            _report_extraction(result)
        index = merge(results)
    else:
        index = load_index(cfg.inputs)
    return _link(index, cfg)


def _format_table(a: GraphMetrics, b: GraphMetrics, delta: MetricsDelta) -> str:
    lines = [f"{'feature':<18}{'a':>8}{'b':>8}{'delta':>8}"]
    for name in FEATURES:
        va, vb = getattr(a, name), getattr(b, name)
        if isinstance(va, bool):
            va, vb = ("yes" if va else "no"), ("yes" if vb else "no")
        lines.append(f"{name:<18}{va:>8}{vb:>8}{getattr(delta, name):>+8d}")
    return "\n".join(lines)


@_exit_codes
def run_compare(cfg: RunConfig) -> int:
    """Print the six-feature table of two corpora and their differences.

    With ``baseline_mode`` the second corpus (or the first, when only one is
    given) is measured through :func:`~logic.evaluation.baseline_view`. The
    first corpus decides which recursion is correct.
    """
    if len(cfg.inputs) > 2 or (len(cfg.inputs) == 1 and not cfg.baseline_mode):
        logger.error("compare needs two inputs, or one with --baseline-mode")
        return EXIT_USAGE
    index_a = load_index(cfg.inputs[:1])
    index_b = load_index(cfg.inputs[1:]) if len(cfg.inputs) == 2 else index_a
    if cfg.baseline_mode:
        index_b = baseline_view(index_b)
    root = cfg.root or default_root(index_a)
    limits = {"max_depth": cfg.max_depth, "max_nodes": cfg.max_nodes}
    metrics_a = program_metrics(index_a, root, reference=index_a, **limits)
    metrics_b = program_metrics(index_b, root, reference=index_a, **limits)
    print(_format_table(metrics_a, metrics_b, compare_metrics(metrics_a, metrics_b)))
    return EXIT_OK


def run_bench(cfg: RunConfig) -> BenchReport:
    """Time extraction of every input dump sequentially.

    Raises:
        LexiconError: Unknown dialect.
        OSError: An input cannot be read.
    """
    lexicon = load_lexicon(cfg.dialect)
    return bench(expand_inputs(cfg.inputs), lexicon, repeats=cfg.repeats)


@_exit_codes
def _bench_command(cfg: RunConfig) -> int:
    report = run_bench(cfg)
    for path, seconds in report.per_file:
        print(f"{path}\t{seconds:.6f}")
    print(f"mean\t{report.mean_seconds:.6f}")
    print(f"crashes\t{report.crashes}")
    return EXIT_OK


# --- argument parsing ---------------------------------------------------------


class _ArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_link_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--root", help="root function (default: main)")
    parser.add_argument("--max-depth", type=int, default=config.MAX_DEPTH)
    parser.add_argument("--max-nodes", type=int, default=config.MAX_NODES)
    parser.add_argument("--dot", type=Path, default=Path("graph.dot"))
    parser.add_argument("--edges", type=Path, default=Path("edges.csv"))


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="islandcg", description="Island-grammar call graphs from AST dumps")
    parser.add_argument("--log-level", default=config.LOG_LEVEL)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    extract = sub.add_parser("extract", help="dump files -> fact CSVs")
    extract.add_argument("--dialect", default=config.DEFAULT_DIALECT)
    extract.add_argument("--out", type=Path, default=Path(config.OUT_DIR))
    extract.add_argument("inputs", nargs="+", type=Path)

    link = sub.add_parser("link", help="fact CSVs -> DOT and edges")
    _add_link_options(link)
    link.add_argument("inputs", nargs="+", type=Path)

    graph = sub.add_parser("graph", help="dump files -> DOT and edges")
    graph.add_argument("--dialect", default=config.DEFAULT_DIALECT)
    _add_link_options(graph)
    graph.add_argument("inputs", nargs="+", type=Path)

    compare = sub.add_parser("compare", help="six-feature comparison of two fact sets")
    compare.add_argument("--baseline-mode", action="store_true")
    compare.add_argument("--root")
    compare.add_argument("--max-depth", type=int, default=config.MAX_DEPTH)
    compare.add_argument("--max-nodes", type=int, default=config.MAX_NODES)
    compare.add_argument("inputs", nargs="+", type=Path)

    bench_cmd = sub.add_parser("bench", help="time extraction per dump")
    bench_cmd.add_argument("--dialect", default=config.DEFAULT_DIALECT)
    bench_cmd.add_argument("--repeats", type=int, default=config.BENCH_REPEATS)
    bench_cmd.add_argument("inputs", nargs="+", type=Path)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Validate parsed arguments into a :class:`RunConfig`."""
    values = {
        "command": args.command,
        "inputs": args.inputs,
        "dialect": getattr(args, "dialect", config.DEFAULT_DIALECT),
        "out_dir": getattr(args, "out", Path(config.OUT_DIR)),
        "root": getattr(args, "root", None),
        "max_depth": getattr(args, "max_depth", config.MAX_DEPTH),
        "max_nodes": getattr(args, "max_nodes", config.MAX_NODES),
        "baseline_mode": getattr(args, "baseline_mode", False),
        "dot_path": getattr(args, "dot", None),
        "edges_path": getattr(args, "edges", None),
        "repeats": getattr(args, "repeats", config.BENCH_REPEATS),
    }
    return RunConfig(**values)


_COMMANDS: dict[str, Callable[[RunConfig], int]] = {
    "extract": run_extract,
    "link": run_link_graph,
    "graph": run_link_graph,
    "compare": run_compare,
    "bench": _bench_command,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        cfg = config_from_args(args)
    except ValidationError as err:
        logger.error("invalid arguments: %s", err)
        return EXIT_USAGE
    return _COMMANDS[cfg.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
