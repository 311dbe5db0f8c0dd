from __future__ import annotations

from typing import Callable, Iterable, Optional

import networkx as nx

from models.fact_models import TOPLEVEL_SCOPE, CallFact, FunctionDef

__all__ = ["DefKey", "FactIndex", "TOPLEVEL_KEY", "def_display"]

DefKey = tuple[Optional[str], str]
TOPLEVEL_KEY: DefKey = (None, TOPLEVEL_SCOPE)


def def_display(key: DefKey) -> str:
    """Render a definition key the way graph nodes show it."""
    class_name, name = key
    return f"{class_name}::{name}" if class_name else name


class FactIndex:
    """Definitions and call facts of a corpus plus its static call digraph.

    ``facts_by_def`` maps a definition key ``(class_name, name)`` to the facts
    made inside that definition, ordered by ``(file, seq)``. Facts outside any
    known definition live under :data:`TOPLEVEL_KEY`.
    """

    def __init__(self) -> None:
        """Initialize an empty index."""
        self.defs_by_name: dict[DefKey, FunctionDef] = {}
        self.facts_by_def: dict[DefKey, list[CallFact]] = {}
        self.known_classes: set[str] = set()
        self.graph: nx.DiGraph = nx.DiGraph()
        self.warnings: list[str] = []

    def register_definition(self, definition: FunctionDef) -> bool:
        """Add ``definition`` unless its key is taken; return whether it was added."""
        key: DefKey = (definition.class_name, definition.name)
        if key in self.defs_by_name:
            return False
        self.defs_by_name[key] = definition
        if definition.class_name:
            self.known_classes.add(definition.class_name)
        self.register_node(def_display(key))
        return True

    def register_facts(self, key: DefKey, facts: Iterable[CallFact]) -> None:
        """Append ``facts`` to the bucket of ``key``.

        Args:
            key: Definition key, or :data:`TOPLEVEL_KEY`.
            facts: Facts already in ``(file, seq)`` order.
        """
        self.facts_by_def.setdefault(key, []).extend(facts)

    def register_node(self, display: str) -> None:
        """Ensure ``display`` exists as a node in the graph."""
        if display not in self.graph:
            self.graph.add_node(display)

    def register_call(self, caller: str, callee: str) -> None:
        """Declare that ``caller`` calls ``callee``.

        Args:
            caller: Display name of the calling definition.
            callee: Qualified display name of the called function.
        """
        self.register_node(caller)
        self.register_node(callee)
        self.graph.add_edge(caller, callee)

    def is_defined(self, key: DefKey) -> bool:
        return key in self.defs_by_name

    def facts_for(self, key: DefKey) -> list[CallFact]:
        return self.facts_by_def.get(key, [])

    @property
    def toplevel_facts(self) -> list[CallFact]:
        return self.facts_for(TOPLEVEL_KEY)

    def never_called(self) -> list[str]:
        """Displays of defined functions no other function calls, sorted."""
        names = []
        for key in self.defs_by_name:
            display = def_display(key)
            callers = set(self.graph.predecessors(display)) - {display}
            if not callers:
                names.append(display)
        return sorted(names)

    def filtered(self, keep: Callable[[CallFact], bool]) -> "FactIndex":
        """Return a copy holding only the facts accepted by ``keep``.

        Definitions and known classes are copied. The call digraph holds the
        definition nodes only; the linker adds the call edges.
        """
        view = FactIndex()
        view.defs_by_name = dict(self.defs_by_name)
        view.known_classes = set(self.known_classes)
        view.graph.add_nodes_from(def_display(key) for key in self.defs_by_name)
        view.facts_by_def = {
            key: [fact for fact in facts if keep(fact)]
            for key, facts in self.facts_by_def.items()
        }
        return view
