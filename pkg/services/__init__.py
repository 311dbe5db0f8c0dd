from .fact_store import FactFileError, read_facts, write_facts
from .dot_emitter import emit_dot, node_label, write_dot

__all__ = [
    "FactFileError",
    "emit_dot",
    "node_label",
    "read_facts",
    "write_dot",
    "write_facts",
]
