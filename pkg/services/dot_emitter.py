"""Render call trees as Graphviz DOT documents."""

from __future__ import annotations

import logging
from pathlib import Path

import graphviz

from models.graph_models import CallTreeNode, DotDocument
from utils.io_utils import atomic_write_text

__all__ = ["TRUNCATION_MARK", "emit_dot", "node_label", "write_dot"]

logger = logging.getLogger(__name__)

TRUNCATION_MARK = "…"


def node_label(node: CallTreeNode) -> str:
    """Display name followed by the argument list, e.g. ``Contact::match(Lname, Fname)``."""
    label = node.qualified.display
    if node.args:
        label = f"{label}({', '.join(node.args)})"
    if node.truncated:
        label += TRUNCATION_MARK
    return label


def emit_dot(tree: CallTreeNode) -> DotDocument:
    """Build the DOT source for ``tree``.

    Nodes are named ``n<id>`` and emitted in preorder, each followed by the
    edge from its parent. Recursive calls are drawn dotted, truncated ones
    as octagons.
    """
    dot = graphviz.Digraph(comment=f"Call graph of {tree.qualified.display}")
    edges = 0
    for node, parent in tree.walk():
        attrs: dict[str, str] = {}
        if node.recursive:
            attrs["style"] = "dotted"
        if node.truncated:
            attrs["shape"] = "octagon"
        # escape() keeps backslashes and <...> in argument text literal
        dot.node(f"n{node.id}", label=graphviz.escape(node_label(node)), **attrs)
        if parent is not None:
            dot.edge(f"n{parent.id}", f"n{node.id}")
            edges += 1
    logger.debug("Emitted DOT with %d edges for %s", edges, tree.qualified.display)
    return DotDocument(text=dot.source)


def write_dot(document: DotDocument, path: Path | str) -> Path:
    """Atomically write ``document`` to ``path`` as UTF-8."""
    return atomic_write_text(path, document.text)
