"""Schemas for the linked call tree, its metrics and command runs."""

from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, root_validator, validator


class CalleeKind(str, Enum):
    MEMBER_DEFINED = "member_defined"
    MEMBER_LIBRARY = "member_library"
    FREE_DEFINED = "free_defined"
    FREE_LIBRARY = "free_library"

    @property
    def is_library(self) -> bool:
        return self in (CalleeKind.MEMBER_LIBRARY, CalleeKind.FREE_LIBRARY)


class QualifiedName(BaseModel):
    """Display name of a callee: ``Class::name``, ``OBJ.name`` or ``name``."""

    display: str
    kind: CalleeKind

    class Config:
        frozen = True

    @root_validator(skip_on_failure=True)
    def _display_matches_kind(cls, values: dict) -> dict:
        display, kind = values["display"], values["kind"]
        if kind is CalleeKind.MEMBER_DEFINED and "::" not in display:
            raise ValueError("member_defined names are shown as Class::name")
        if kind is CalleeKind.MEMBER_LIBRARY and not display.startswith("OBJ."):
            raise ValueError("member_library names are shown as OBJ.name")
        return values


class CallTreeNode(BaseModel):
    """One call in the expanded tree; recursive nodes are leaves."""

    id: int
    qualified: QualifiedName
    args: List[str] = []
    children: List["CallTreeNode"] = []
    recursive: bool = False
    truncated: bool = False

    @root_validator(skip_on_failure=True)
    def _recursive_is_leaf(cls, values: dict) -> dict:
        if values["recursive"] and values["children"]:
            raise ValueError("recursive nodes cannot have children")
        return values

    def walk(self):
        """Yield ``(node, parent)`` pairs in preorder."""
        stack: list[tuple[CallTreeNode, Optional[CallTreeNode]]] = [(self, None)]
        while stack:
            node, parent = stack.pop()
            yield node, parent
            stack.extend((child, node) for child in reversed(node.children))


CallTreeNode.update_forward_refs()


class GraphMetrics(BaseModel):
    """The six features compared between call graphs."""

    total_calls: int = 0
    member_calls: int = 0
    free_calls: int = 0
    library_calls: int = 0
    argument_count: int = 0
    recursion_correct: bool = True

    @root_validator(skip_on_failure=True)
    def _total_is_sum(cls, values: dict) -> dict:
        parts = values["member_calls"] + values["free_calls"] + values["library_calls"]
        if values["total_calls"] != parts:
            raise ValueError("total_calls must equal member + free + library calls")
        return values


class MetricsDelta(BaseModel):
    """Fieldwise signed difference of two :class:`GraphMetrics`."""

    total_calls: int = 0
    member_calls: int = 0
    free_calls: int = 0
    library_calls: int = 0
    argument_count: int = 0
    recursion_correct: int = 0


class RunConfig(BaseModel):
    """Validated settings for one command-line run."""

    command: Literal["extract", "link", "graph", "compare", "bench"]
    inputs: List[Path]
    dialect: str = "cpp"
    out_dir: Path = Path("facts")
    root: Optional[str] = None
    max_depth: int = 100
    max_nodes: int = 100_000
    baseline_mode: bool = False
    dot_path: Optional[Path] = None
    edges_path: Optional[Path] = None
    repeats: int = 3

    @validator("inputs")
    def _inputs_not_empty(cls, value: List[Path]) -> List[Path]:
        if not value:
            raise ValueError("at least one input is required")
        return value

    @validator("max_depth", "max_nodes", "repeats")
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("limits must be >= 1")
        return value


class BenchReport(BaseModel):
    """Extraction timings per file (median of the repeats)."""

    per_file: List[Tuple[str, float]] = []
    mean_seconds: float = 0.0
    crashes: int = 0


class DotDocument(BaseModel):
    """Complete DOT source of one call tree."""

    text: str
