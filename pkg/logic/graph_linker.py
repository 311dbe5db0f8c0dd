"""Link fact files of many sources into one tree-shaped call graph.

The linker works on a :class:`~logic.call_index.FactIndex`. Each call site
becomes its own branch. A call whose name already appears on its root path
is marked recursive and not expanded. Calls without a corpus definition
stay visible as library leaves.
"""

from __future__ import annotations

import csv
import io
import logging
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Optional, Union

from models.fact_models import (
    TOPLEVEL_SCOPE,
    CallFact,
    ExtractionResult,
)
from models.graph_models import (
    CalleeKind,
    CallTreeNode,
    GraphMetrics,
    MetricsDelta,
    QualifiedName,
)
from logic.call_index import TOPLEVEL_KEY, DefKey, FactIndex, def_display
from services.fact_store import join_escaped
from utils import config
from utils.io_utils import atomic_write_text

__all__ = [
    "EDGES_HEADER",
    "UnknownRootError",
    "build_tree",
    "callee_key",
    "candidate_roots",
    "compare_metrics",
    "default_root",
    "graph_metrics",
    "link_calls",
    "merge",
    "qualify_callee",
    "resolve_root",
    "write_edges",
]

logger = logging.getLogger(__name__)

EDGES_HEADER = ["parent_id", "child_id", "parent_name", "child_name", "edge_kind", "args"]


class UnknownRootError(ValueError):
    """The requested root has no definition; ``candidates`` lists usable roots."""

    def __init__(self, root: str, candidates: list[str]) -> None:
        listing = ", ".join(candidates) if candidates else "(none)"
        super().__init__(f"unknown root {root!r}; candidate roots: {listing}")
        self.root = root
        self.candidates = candidates


# --- merge --------------------------------------------------------------------


def qualify_callee(fact: CallFact, index: FactIndex) -> QualifiedName:
    """Qualify the callee of ``fact`` against the corpus.

    Returns:
        ``Class::callee`` for receivers of corpus classes, ``OBJ.callee`` for
        other receivers, otherwise the plain name, free-defined when the
        corpus defines it and free-library when not.
    """
    if fact.receiver_class is not None:
        if fact.receiver_class in index.known_classes:
            return QualifiedName(
                display=f"{fact.receiver_class}::{fact.callee}",
                kind=CalleeKind.MEMBER_DEFINED,
            )
        return QualifiedName(display=f"OBJ.{fact.callee}", kind=CalleeKind.MEMBER_LIBRARY)
    if index.is_defined((None, fact.callee)):
        return QualifiedName(display=fact.callee, kind=CalleeKind.FREE_DEFINED)
    return QualifiedName(display=fact.callee, kind=CalleeKind.FREE_LIBRARY)


def callee_key(fact: CallFact, qualified: QualifiedName) -> Optional[DefKey]:
    """Definition key a qualified callee expands into, ``None`` for library calls."""
    if qualified.kind is CalleeKind.MEMBER_DEFINED:
        return (fact.receiver_class, fact.callee)
    if qualified.kind is CalleeKind.FREE_DEFINED:
        return (None, fact.callee)
    return None


def link_calls(index: FactIndex) -> FactIndex:
    """Add one digraph edge per caller/callee pair of ``index``; returns ``index``."""
    for key, facts in index.facts_by_def.items():
        caller = def_display(key)
        for fact in facts:
            index.register_call(caller, qualify_callee(fact, index).display)
    return index


def _overload_warnings(index: FactIndex) -> list[str]:
    arities: dict[str, set[int]] = defaultdict(set)
    for facts in index.facts_by_def.values():
        for fact in facts:
            arities[qualify_callee(fact, index).display].add(fact.arity)
    return [
        f"{name}: called with {', '.join(map(str, sorted(found)))} arguments; overloads share one node"
        for name, found in sorted(arities.items())
        if len(found) > 1
    ]


def merge(results: Iterable[ExtractionResult]) -> FactIndex:
    """Index the facts and definitions of all ``results``.

    Files are visited in lexicographic order. When several files define the
    same ``(class, name)``, the first file keeps the definition and its facts,
    and one warning names the other files. Prototypes are not definitions, so
    headers declaring a function in every including file do not count.
    """
    results = list(results)
    index = FactIndex()
    all_defs = sorted(
        (d for r in results for d in r.defs), key=lambda d: (d.file, d.name, d.class_name or "")
    )
    duplicates: dict[DefKey, list[str]] = defaultdict(list)
    for definition in all_defs:
        if not index.register_definition(definition):
            duplicates[(definition.class_name, definition.name)].append(definition.file)
    for dup_key, others in sorted(duplicates.items(), key=lambda item: (item[0][0] or "", item[0][1])):
        kept = index.defs_by_name[dup_key].file
        index.warnings.append(
            f"{kept}:{def_display(dup_key)} is also defined in {', '.join(others)}; keeping {kept}"
        )

    by_key: dict[DefKey, dict[str, list[CallFact]]] = defaultdict(lambda: defaultdict(list))
    for result in results:
        for fact in result.facts:
            key: DefKey = (fact.caller_class, fact.caller_scope)
            if fact.caller_scope == TOPLEVEL_SCOPE or not index.is_defined(key):
                key = TOPLEVEL_KEY
            by_key[key][fact.file].append(fact)

    for key in sorted(by_key, key=lambda k: (k[0] or "", k[1])):
        per_file = by_key[key]
        files = sorted(per_file)
        for file in files:
            per_file[file].sort(key=lambda f: (f.seq, f.caller_class or ""))
        if key == TOPLEVEL_KEY:
            index.register_facts(key, (f for file in files for f in per_file[file]))
            continue
        winner = index.defs_by_name[key].file
        index.register_facts(key, per_file.get(winner, []))

    link_calls(index)
    index.warnings.extend(_overload_warnings(index))
    logger.info(
        "Merged %d definitions, %d callers, %d classes",
        len(index.defs_by_name),
        len(index.facts_by_def),
        len(index.known_classes),
    )
    return index


# --- roots --------------------------------------------------------------------


def candidate_roots(index: FactIndex) -> list[str]:
    """Functions never called inside the corpus, plus ``main`` when defined."""
    names = set(index.never_called())
    if index.is_defined((None, "main")):
        names.add("main")
    if index.toplevel_facts:
        names.add(TOPLEVEL_SCOPE)
    return sorted(names)


def default_root(index: FactIndex) -> Optional[str]:
    """``main`` if defined, else the first never-called function."""
    if index.is_defined((None, "main")):
        return "main"
    never_called = index.never_called()
    if never_called:
        return never_called[0]
    return TOPLEVEL_SCOPE if index.toplevel_facts else None


def _split_display(display: str) -> DefKey:
    class_name, sep, name = display.rpartition("::")
    return (class_name, name) if sep and class_name else (None, display)


def resolve_root(index: FactIndex, root: Union[str, QualifiedName, None]) -> tuple[QualifiedName, DefKey]:
    """Turn a root name into its qualified name and definition key.

    Raises:
        UnknownRootError: ``root`` is not defined in the corpus.
    """
    name = root.display if isinstance(root, QualifiedName) else root
    if name is None:
        name = default_root(index)
    if name == TOPLEVEL_SCOPE and index.toplevel_facts:
        return QualifiedName(display=name, kind=CalleeKind.FREE_DEFINED), TOPLEVEL_KEY
    if name is not None:
        key = _split_display(name)
        if index.is_defined(key):
            kind = CalleeKind.MEMBER_DEFINED if key[0] else CalleeKind.FREE_DEFINED
            return QualifiedName(display=def_display(key), kind=kind), key
    raise UnknownRootError(name or "", candidate_roots(index))


# --- tree ---------------------------------------------------------------------


def build_tree(
    index: FactIndex,
    root: Union[str, QualifiedName, None] = None,
    max_depth: int = config.MAX_DEPTH,
    max_nodes: int = config.MAX_NODES,
    warnings: Optional[list[str]] = None,
) -> CallTreeNode:
    """Expand the call tree below ``root`` depth first.

    Args:
        index: Merged corpus.
        root: Root function name (``main``, ``Class::name``); ``None`` picks
            :func:`default_root`.
        max_depth: Nodes at this depth are not expanded further.
        max_nodes: Node budget for the whole tree.
        warnings: Receives truncation messages.

    Returns:
        The root node. Node ids follow preorder starting at 0.

    Raises:
        UnknownRootError: ``root`` is not defined in the corpus.
    """
    root_name, root_key = resolve_root(index, root)
    tree = CallTreeNode(id=0, qualified=root_name)
    created = 1
    notes = warnings if warnings is not None else []

    # (parent, fact, parent path names, child depth)
    pending: list[tuple[CallTreeNode, CallFact, frozenset[str], int]] = []

    def expand(node: CallTreeNode, key: DefKey, path: frozenset[str], depth: int) -> None:
        nonlocal created
        facts = index.facts_for(key)
        if not facts:
            return
        if depth >= max_depth:
            node.truncated = True
            notes.append(f"{node.qualified.display}: expansion stopped at depth {max_depth}")
            return
        if created + len(facts) > max_nodes:
            node.truncated = True
            notes.append(f"{node.qualified.display}: expansion stopped after {max_nodes} nodes")
            return
        created += len(facts)
        pending.extend((node, fact, path, depth + 1) for fact in reversed(facts))

    expand(tree, root_key, frozenset({root_name.display}), 0)
    next_id = 1
    while pending:
        parent, fact, path, depth = pending.pop()
        qualified = qualify_callee(fact, index)
        recursive = qualified.display in path
        node = CallTreeNode(
            id=next_id,
            qualified=qualified,
            args=[arg.display for arg in fact.args],
            recursive=recursive,
        )
        next_id += 1
        parent.children.append(node)
        key = callee_key(fact, qualified)
        if recursive or key is None:
            continue
        expand(node, key, path | {qualified.display}, depth)

    if warnings is None:
        for note in notes:
            logger.warning("%s", note)
    return tree


# --- metrics ------------------------------------------------------------------


def graph_metrics(tree: CallTreeNode, expected_recursion: Iterable[str] = ()) -> GraphMetrics:
    """Count the six comparison features of ``tree``.

    Every distinct callee name counts once, whatever the number of branches
    calling it; the root node itself is not a call. Argument counts come from
    the first branch of each callee.
    """
    seen: dict[str, CallTreeNode] = {}
    recursive_names: set[str] = set()
    for node, parent in tree.walk():
        if parent is None:
            continue
        if node.recursive:
            recursive_names.add(node.qualified.display)
        seen.setdefault(node.qualified.display, node)

    kinds = [node.qualified.kind for node in seen.values()]
    member = sum(kind is CalleeKind.MEMBER_DEFINED for kind in kinds)
    free = sum(kind is CalleeKind.FREE_DEFINED for kind in kinds)
    library = sum(kind.is_library for kind in kinds)
    return GraphMetrics(
        total_calls=member + free + library,
        member_calls=member,
        free_calls=free,
        library_calls=library,
        argument_count=sum(len(node.args) for node in seen.values()),
        recursion_correct=recursive_names == set(expected_recursion),
    )


def compare_metrics(a: GraphMetrics, b: GraphMetrics) -> MetricsDelta:
    """Fieldwise ``a - b``; the recursion flag counts as 0 or 1."""
    return MetricsDelta(
        **{name: int(getattr(a, name)) - int(getattr(b, name)) for name in MetricsDelta.__fields__}
    )


# --- edges file ---------------------------------------------------------------


def _edge_kind(node: CallTreeNode) -> str:
    if node.recursive:
        return "recursive"
    if node.truncated:
        return "truncated"
    return "library" if node.qualified.kind.is_library else "defined"


def render_edges(tree: CallTreeNode) -> str:
    """CSV text with one row per parent/child edge, in preorder."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(EDGES_HEADER)
    for node, parent in tree.walk():
        if parent is None:
            continue
        writer.writerow(
            [
                parent.id,
                node.id,
                parent.qualified.display,
                node.qualified.display,
                _edge_kind(node),
                join_escaped(node.args),
            ]
        )
    return buffer.getvalue()


def write_edges(tree: CallTreeNode, path: Path | str) -> Path:
    """Atomically write :func:`render_edges` output to ``path``."""
    return atomic_write_text(path, render_edges(tree))
