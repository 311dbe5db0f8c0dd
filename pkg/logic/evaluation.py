"""Comparison and timing harnesses built on the linker."""

from __future__ import annotations

import logging
import time
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from models.fact_models import CallFact, LexiconTable, ReceiverKind
from models.graph_models import BenchReport, GraphMetrics, QualifiedName
from logic.call_extractor import extract_facts
from logic.call_index import FactIndex
from logic.file_tools import read_dump, source_name
from logic.graph_linker import (
    build_tree,
    graph_metrics,
    link_calls,
    qualify_callee,
    resolve_root,
)
from utils import config

__all__ = [
    "FEATURES",
    "baseline_view",
    "bench",
    "expected_recursion",
    "program_metrics",
]

logger = logging.getLogger(__name__)

FEATURES = (
    "total_calls",
    "member_calls",
    "free_calls",
    "library_calls",
    "argument_count",
    "recursion_correct",
)


def baseline_view(index: FactIndex) -> FactIndex:
    """Documentation-generator view of ``index``.

    Such tools do not show calls into library code and miss member calls
    made through the implied ``this``. Both kinds of facts are dropped.
    """

    def keep(fact: CallFact) -> bool:
        if fact.receiver_kind is ReceiverKind.THIS_IMPLIED:
            return False
        return not qualify_callee(fact, index).kind.is_library

    return link_calls(index.filtered(keep))


def expected_recursion(
    index: FactIndex,
    root: Union[str, QualifiedName, None] = None,
    max_depth: int = config.MAX_DEPTH,
    max_nodes: int = config.MAX_NODES,
) -> set[str]:
    """Names a correct tree marks as recursive, found on the static digraph.

    Walks every simple path from ``root`` through ``index.graph`` and
    collects each successor that is already on the current path. The walk is
    independent of :func:`~logic.graph_linker.build_tree` and shares its
    depth limit and node budget.
    """
    root_name, _ = resolve_root(index, root)
    graph = index.graph
    found: set[str] = set()
    visited = 0
    stack: list[tuple[str, tuple[str, ...]]] = [(root_name.display, (root_name.display,))]
    while stack and visited < max_nodes:
        name, path = stack.pop()
        visited += 1
        if len(path) > max_depth:
            continue
        for succ in graph.successors(name):
            if succ in path:
                found.add(succ)
            else:
                stack.append((succ, path + (succ,)))
    return found


def program_metrics(
    index: FactIndex,
    root: Union[str, QualifiedName, None] = None,
    *,
    reference: Optional[FactIndex] = None,
    max_depth: int = config.MAX_DEPTH,
    max_nodes: int = config.MAX_NODES,
) -> GraphMetrics:
    """Six-feature metrics of the tree below ``root``.

    Args:
        index: Corpus to measure.
        root: Root function; ``None`` uses the default root.
        reference: Corpus whose recursion is taken as correct; defaults to
            ``index`` itself.
        max_depth: Depth limit passed to the tree expansion.
        max_nodes: Node budget passed to the tree expansion.
    """
    tree = build_tree(index, root, max_depth=max_depth, max_nodes=max_nodes)
    expected = expected_recursion(
        reference or index, tree.qualified.display, max_depth=max_depth, max_nodes=max_nodes
    )
    return graph_metrics(tree, expected)


def bench(
    paths: Sequence[Path],
    lexicon: LexiconTable,
    repeats: int = config.BENCH_REPEATS,
) -> BenchReport:
    """Time extraction of each dump, one file at a time.

    Each file is read once and extracted ``repeats`` times; the median wall
    time is reported. A failing extraction counts as a crash and the run
    moves on to the next file.

    Raises:
        OSError: A dump file cannot be read.
    """
    per_file: list[tuple[str, float]] = []
    crashes = 0
    for path in paths:
        text = read_dump(path)
        name = source_name(path)
        timings: list[float] = []
        for _ in range(max(1, repeats)):
            start = time.perf_counter()
            try:
                extract_facts(text, name, lexicon)
            except Exception:  # noqa: BLE001
                logger.error("Extraction crashed on %s", path, exc_info=True)
                crashes += 1
                break
            timings.append(time.perf_counter() - start)
        if timings:
            per_file.append((str(path), float(np.median(timings))))
    mean = float(np.mean([t for _, t in per_file])) if per_file else 0.0
    return BenchReport(per_file=per_file, mean_seconds=mean, crashes=crashes)
