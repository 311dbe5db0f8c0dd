"""Water-tolerant grammar over island-lexer events.

Only land lines (lines opened by a dialect keyword) become nodes. Every
non-blank line closes the open frames at its own depth or deeper, so a land
line is attached to its nearest land ancestor and never to an earlier
sibling hidden behind a water line. Water lines open nothing.

Semantic actions:

* ``FUNC_DEF`` / ``METHOD_DEF`` / ``CLASS_DEF`` open scopes; a declaration
  becomes a definition once a ``BODY`` line appears directly below it;
* ``CALL`` / ``MEMBER_CALL`` open a call whose land children are the callee
  expression followed by the arguments;
* every other land node is part of an argument or receiver subtree.

Declarations and calls located in system headers are skipped.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from models.fact_models import (
    TOPLEVEL_SCOPE,
    UNKNOWN_DISPLAY,
    UNRESOLVED_CALLEE,
    ArgKind,
    ArgValue,
    CallFact,
    DefKind,
    ExtractionResult,
    FunctionDef,
    LexiconTable,
    LineEvent,
    ReceiverKind,
    TokenClass,
    token_text,
)
from logic.island_lexer import scan_dump
from utils import config

__all__ = [
    "LandNode",
    "class_from_type",
    "classify_argument",
    "extract_facts",
    "resolve_receiver_class",
]

logger = logging.getLogger(__name__)

_CALL_CLASSES = (TokenClass.CALL, TokenClass.MEMBER_CALL)
_DEF_CLASSES = (TokenClass.FUNC_DEF, TokenClass.METHOD_DEF)

# decl kinds printed in "<Kind> 0xADDR 'name'" references
_FUNCTION_DECL_KINDS = {"Function", "CXXMethod", "FunctionTemplate", "CXXConversion"}
_POINTER_DECL_KINDS = {"Var", "ParmVar", "Field", "ImplicitParam"}

_NOISE_WORD_RE = re.compile(r"0x[0-9a-fA-F]+\Z|[0-9]|.*:[0-9]")
_ATTRIBUTE_WORDS = frozenset(
    """lvalue xvalue prvalue used referenced implicit invalid sloc line col parent
    prev definition static extern inline virtual pure const volatile this cinit
    callinit listinit default delete constexpr public private protected struct
    class union enum prefix postfix selector cannot overflow non_odr_use_unevaluated
    non_odr_use_constant non_odr_use_discarded bitfield trivial instance
    """.split()
) | _FUNCTION_DECL_KINDS | _POINTER_DECL_KINDS
_TYPE_NOISE_RE = re.compile(r"\b(?:const|volatile|class|struct|union|enum|typename)\b")
_TEMPLATE_ARGS_RE = re.compile(r"<[^<>]*>")
_BUILTIN_TYPES = frozenset(
    "void bool char short int long float double signed unsigned auto id SEL".split()
)
# "<file:line:col" or ", file:line:col" in the location part of a line
_LOCATION_RE = re.compile(r"(?:<|, |\s)([^\s<>,'\"]+):[0-9]+:[0-9]+")
_RELATIVE_LOCATIONS = frozenset({"line", "col"})


@dataclass(eq=False)
class LandNode:
    """A land line inside the extractor's context tree."""

    event: LineEvent
    cls: TokenClass
    children: list["LandNode"] = field(default_factory=list)
    call: Optional["_PendingCall"] = None
    # type printed on the first line below a member expression, water or not
    object_type: Optional[str] = None
    child_seen: bool = False


@dataclass(eq=False)
class _DefFrame:
    name: Optional[str]
    class_name: Optional[str]
    is_method: bool
    has_body: bool = False
    in_system_header: bool = False


@dataclass(eq=False)
class _ClassFrame:
    name: Optional[str]


@dataclass(eq=False)
class _PendingCall:
    order: int
    scope: Optional[_DefFrame]
    node: LandNode
    callee: str = UNRESOLVED_CALLEE
    receiver_class: Optional[str] = None
    receiver_kind: ReceiverKind = ReceiverKind.NONE
    args: list[ArgValue] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    in_system_header: bool = False


_Frame = Union[LandNode, _DefFrame, _ClassFrame]


# --- line readers ------------------------------------------------------------


def _is_identifier(word: str) -> bool:
    return bool(word) and (word[0].isalpha() or word[0] in "_~")


def _is_name_word(word: str) -> bool:
    return (
        _is_identifier(word)
        and not _NOISE_WORD_RE.match(word)
        and word not in _ATTRIBUTE_WORDS
    )


def _words(event: LineEvent) -> list[str]:
    return [t.lexeme for t in event.tokens if t.cls is TokenClass.WORD]


def _type_texts(event: LineEvent) -> list[str]:
    return [token_text(t) for t in event.tokens if t.cls is TokenClass.TYPE_TEXT]


def _first_type(event: LineEvent) -> Optional[str]:
    types = _type_texts(event)
    return types[0] if types else None


def class_from_type(type_text: Optional[str]) -> Optional[str]:
    """Reduce a printed type such as ``'class DrawingAPI *'`` to ``DrawingAPI``.

    Qualifiers, pointer and reference marks, template arguments and
    namespace prefixes are dropped. Builtin, placeholder and function types
    give ``None``.
    """
    if not type_text or type_text.startswith("<") or "(" in type_text:
        return None
    text = _TYPE_NOISE_RE.sub(" ", type_text)
    previous = None
    while previous != text:
        previous, text = text, _TEMPLATE_ARGS_RE.sub("", text)
    parts = text.replace("*", " ").replace("&", " ").split()
    if not parts:
        return None
    name = parts[-1].split("::")[-1]
    if not _is_identifier(name) or name in _BUILTIN_TYPES:
        return None
    return name


def _decl_ref(event: LineEvent) -> tuple[Optional[str], Optional[str]]:
    """Read ``(decl_kind, name)`` from a ``<Kind> 0xADDR 'name'`` reference."""
    tokens = event.tokens
    for i in range(2, len(tokens) - 1):
        kind, address, name = tokens[i - 1], tokens[i], tokens[i + 1]
        if (
            kind.cls is TokenClass.WORD
            and address.cls is TokenClass.WORD
            and name.cls is TokenClass.WORD
            and address.lexeme.startswith("0x")
            and _is_identifier(kind.lexeme)
            and _is_identifier(name.lexeme)
        ):
            return kind.lexeme, name.lexeme
    names = [w for w in _words(event) if _is_name_word(w)]
    return None, (names[-1] if names else None)


def _def_name(event: LineEvent) -> Optional[str]:
    """Name of a function or method declaration: last name word before its type."""
    candidates: list[str] = []
    for token in event.tokens[1:]:
        if token.cls is TokenClass.TYPE_TEXT:
            break
        if token.cls is TokenClass.WORD and _is_name_word(token.lexeme):
            candidates.append(token.lexeme)
    if not candidates:
        return None
    return candidates[-1].rstrip(":") or None


def _record_name(event: LineEvent) -> Optional[str]:
    words = _words(event)
    for i, word in enumerate(words[:-1]):
        if word in ("class", "struct", "union") and _is_name_word(words[i + 1]):
            return words[i + 1]
    return None


def _word_after(event: LineEvent, marker: str) -> Optional[str]:
    words = _words(event)
    for i, word in enumerate(words[:-1]):
        if word == marker:
            return words[i + 1]
    return None


def _address_after(event: LineEvent, marker: str) -> Optional[str]:
    value = _word_after(event, marker)
    return value if value and value.startswith("0x") else None


def _own_address(event: LineEvent) -> Optional[str]:
    if len(event.tokens) > 1 and event.tokens[1].lexeme.startswith("0x"):
        return event.tokens[1].lexeme
    return None


def _member_name(event: LineEvent) -> Optional[str]:
    """The ``->name`` / ``.name`` word of a member expression."""
    raw = event.raw
    tokens = event.tokens[1:]
    # source locations come before the type, the member name after it
    for i, token in enumerate(tokens):
        if token.cls is TokenClass.TYPE_TEXT:
            tokens = tokens[i + 1 :]
            break
    for token in tokens:
        if token.cls is not TokenClass.WORD or not _is_identifier(token.lexeme):
            continue
        if _NOISE_WORD_RE.match(token.lexeme):
            continue
        if raw.endswith("->", 0, token.column) or raw.endswith(".", 0, token.column):
            return token.lexeme
    return None


def _number_value(event: LineEvent) -> Optional[str]:
    numbers = [
        w for w in _words(event) if w[0].isdigit() and not w.startswith("0x")
    ]
    return numbers[-1] if numbers else None


def _string_value(event: LineEvent) -> Optional[str]:
    for token in event.tokens:
        if token.cls is TokenClass.STRING and not token.keyword:
            return token.lexeme
    return None


def _operator(event: LineEvent) -> Optional[str]:
    types = _type_texts(event)
    return types[-1] if len(types) > 1 else None


def _selector(event: LineEvent) -> Optional[str]:
    value = _word_after(event, "selector")
    return value.rstrip(":") or None if value else None


def _class_message_receiver(event: LineEvent) -> Optional[str]:
    tokens = event.tokens
    for i, token in enumerate(tokens[:-1]):
        nxt = tokens[i + 1]
        if token.lexeme == "class" and nxt.cls is TokenClass.TYPE_TEXT:
            return class_from_type(token_text(nxt))
    return None


def _is_operator_ref(node: LandNode) -> bool:
    return node.cls is TokenClass.ARGUMENT and "'operator" in node.event.raw


def _object_of(member: LandNode) -> Optional[LandNode]:
    """First land child of a member expression that is not an overloaded operator."""
    for child in member.children:
        if not _is_operator_ref(child):
            return child
    return None


def _this_class(node: LandNode) -> Optional[str]:
    """Class of the first ``this`` node in the subtree of ``node``."""
    stack = [node]
    while stack:
        current = stack.pop()
        if current.cls is TokenClass.THIS_REF:
            found = class_from_type(_first_type(current.event))
            if found:
                return found
        stack.extend(reversed(current.children))
    return None


# --- semantic actions --------------------------------------------------------


def _render(node: LandNode) -> Optional[str]:
    """Source-like rendering of an expression subtree, ``None`` when unknown."""
    cls, event, children = node.cls, node.event, node.children
    if cls is TokenClass.ARGUMENT:
        return _decl_ref(event)[1]
    if cls is TokenClass.THIS_REF:
        return "this"
    if cls is TokenClass.NUMBER:
        return _number_value(event)
    if cls is TokenClass.STRING:
        return _string_value(event)
    if cls in _CALL_CLASSES and node.call is not None:
        call = node.call
        return f"{call.callee}({', '.join(a.display for a in call.args)})"
    if cls is TokenClass.MEMBER_REF:
        member = _member_name(event)
        obj = _object_of(node)
        owner = _render(obj) if obj is not None else None
        return f"{owner}.{member}" if member and owner else None
    if cls is TokenClass.SUBSCRIPT and len(children) == 2:
        base, index = _render(children[0]), _render(children[1])
        return f"{base}[{index}]" if base and index else None
    if cls is TokenClass.BINARY_OP and len(children) == 2:
        op, lhs, rhs = _operator(event), _render(children[0]), _render(children[1])
        return f"{lhs}{op}{rhs}" if op and lhs and rhs else None
    if cls is TokenClass.UNARY_OP and len(children) == 1:
        op, operand = _operator(event), _render(children[0])
        if not op or not operand:
            return None
        return f"{operand}{op}" if "postfix" in _words(event) else f"{op}{operand}"
    return None


_KIND_BY_CLASS = {
    TokenClass.ARGUMENT: ArgKind.VARIABLE,
    TokenClass.THIS_REF: ArgKind.VARIABLE,
    TokenClass.STRING: ArgKind.STRING_LIT,
    TokenClass.NUMBER: ArgKind.NUMBER_LIT,
    TokenClass.SUBSCRIPT: ArgKind.SUBSCRIPT,
    TokenClass.MEMBER_REF: ArgKind.MEMBER_VAR,
    TokenClass.CALL: ArgKind.NESTED_CALL,
    TokenClass.MEMBER_CALL: ArgKind.NESTED_CALL,
    TokenClass.BINARY_OP: ArgKind.BINARY_OP,
    TokenClass.UNARY_OP: ArgKind.UNARY_OP,
}


def classify_argument(
    arg: LandNode,
    nested: Optional[CallFact] = None,
    warnings: Optional[list[str]] = None,
) -> ArgValue:
    """Map one argument subtree to one of the eight argument kinds.

    Args:
        arg: Top land node of the argument subtree.
        nested: Fact of the inner call when the argument is itself a call.
        warnings: Receives a message when the subtree cannot be classified.

    Returns:
        The classified argument. Unclassifiable subtrees become a
        ``Variable`` with display ``<unknown>``.
    """
    kind = _KIND_BY_CLASS.get(arg.cls)
    if nested is not None:
        display: Optional[str] = (
            f"{nested.callee}({', '.join(a.display for a in nested.args)})"
        )
    else:
        display = _render(arg)
    if kind is None or not display:
        if warnings is not None:
            warnings.append(f"unclassifiable argument: {arg.event.raw.strip()[:80]}")
        return ArgValue(kind=ArgKind.VARIABLE, display=UNKNOWN_DISPLAY)
    if kind is ArgKind.MEMBER_VAR:
        owner, _, _ = display.rpartition(".")
        return ArgValue(kind=kind, display=display, object=owner)
    return ArgValue(kind=kind, display=display)


def _receiver_of(
    obj: Optional[LandNode], printed_type: Optional[str] = None
) -> tuple[Optional[str], ReceiverKind]:
    found = class_from_type(printed_type)
    if found is None and obj is not None:
        found = class_from_type(_first_type(obj.event))
    if found is None:
        return None, ReceiverKind.NONE
    if obj is not None and obj.cls is TokenClass.THIS_REF:
        return found, ReceiverKind.THIS_IMPLIED
    if obj is not None and obj.cls is TokenClass.MEMBER_REF:
        return found, ReceiverKind.MEMBER_VARIABLE
    return found, ReceiverKind.NAMED_OBJECT


def resolve_receiver_class(
    call: LandNode, warnings: Optional[list[str]] = None
) -> tuple[Optional[str], ReceiverKind]:
    """Find the class of the object a member call is made on.

    ``call`` is the call's land node with its (closed) subtree. The class is
    read from the type printed on the line right below the callee member
    expression, which is the object expression even when it is water. For
    ``it->display()`` that line is the ``operator->`` call typed
    ``'Contact *'``, so iterators yield their pointee class. The receiver
    kind comes from the first land child of the member expression that is
    not a reference to an ``operator`` function. Objective-C messages use
    their first land child.

    Returns:
        ``(class, kind)``; free calls and ambiguous receivers give
        ``(None, ReceiverKind.NONE)``, the latter with a warning.
    """
    if call.cls is not TokenClass.MEMBER_CALL:
        return None, ReceiverKind.NONE
    printed_type: Optional[str] = None
    obj: Optional[LandNode] = None
    if _selector(call.event) is not None:
        class_receiver = _class_message_receiver(call.event)
        if class_receiver:
            return class_receiver, ReceiverKind.NAMED_OBJECT
        obj = call.children[0] if call.children else None
    else:
        ref = call.children[0] if call.children else None
        if ref is not None and ref.cls is TokenClass.MEMBER_REF:
            obj = _object_of(ref)
            printed_type = ref.object_type
    resolved = _receiver_of(obj, printed_type)
    if resolved[0] is None and warnings is not None:
        warnings.append("receiver class of member call cannot be determined")
    return resolved


def _finish_call(pending: _PendingCall) -> None:
    node = pending.node
    children = node.children
    scope = pending.scope.name if pending.scope and pending.scope.name else TOPLEVEL_SCOPE
    first = children[0] if children else None
    arg_nodes = children[1:]

    if node.cls is TokenClass.MEMBER_CALL:
        selector = _selector(node.event)
        if selector is not None:
            pending.callee = selector
            if _class_message_receiver(node.event):
                arg_nodes = children
        elif first is not None and first.cls is TokenClass.MEMBER_REF and _member_name(first.event):
            pending.callee = _member_name(first.event)  # type: ignore[assignment]
        else:
            pending.warnings.append(
                f"member call in {scope}: callee name cannot be resolved"
            )
        pending.receiver_class, pending.receiver_kind = resolve_receiver_class(
            node, pending.warnings
        )
    else:
        kind, name = _decl_ref(first.event) if first is not None and first.cls is TokenClass.ARGUMENT else (None, None)
        if name and (kind is None or kind in _FUNCTION_DECL_KINDS):
            pending.callee = name
        elif name and kind in _POINTER_DECL_KINDS:
            pending.warnings.append(
                f"call through function pointer '{name}' in {scope}: "
                "the name of the called function cannot be caught"
            )
        else:
            pending.warnings.append(
                f"call in {scope}: callee expression is not a function name"
            )
        if first is None:
            arg_nodes = []

    for arg in arg_nodes:
        nested = None
        if arg.call is not None:
            nested = CallFact(
                file="",
                caller_scope=scope,
                seq=0,
                callee=arg.call.callee,
                args=arg.call.args,
            )
        pending.args.append(classify_argument(arg, nested, pending.warnings))


class _Extractor:
    """One pass over one dump; instances are not shared between files."""

    def __init__(self, file: str) -> None:
        self.file = file
        self.stack: list[tuple[int, _Frame]] = []
        self.calls: list[_PendingCall] = []
        self.defs: list[_DefFrame] = []
        self.record_names: dict[str, str] = {}
        self.in_system_header = False

    def _current_def(self) -> Optional[_DefFrame]:
        for _, frame in reversed(self.stack):
            if isinstance(frame, _DefFrame) and frame.name:
                return frame
        return None

    def _enclosing_class(self) -> Optional[str]:
        for _, frame in reversed(self.stack):
            if isinstance(frame, _ClassFrame):
                return frame.name
        return None

    def _close(self, frame: _Frame) -> None:
        if isinstance(frame, LandNode) and frame.call is not None:
            _finish_call(frame.call)

    def _open_def(self, event: LineEvent, cls: TokenClass) -> _DefFrame:
        name = _def_name(event)
        is_method = cls is TokenClass.METHOD_DEF
        class_name = None
        if is_method and "static" not in _words(event):
            class_name = self._enclosing_class()
            if class_name is None:
                parent = _address_after(event, "parent")
                class_name = self.record_names.get(parent) if parent else None
        frame = _DefFrame(
            name=name,
            class_name=class_name,
            is_method=is_method,
            in_system_header=self.in_system_header,
        )
        if name:
            self.defs.append(frame)
        return frame

    def _track_location(self, raw: str) -> None:
        # the dump names a file only when it changes; "line:"/"col:" keep the last one
        for match in _LOCATION_RE.finditer(raw.split("'", 1)[0]):
            name = match.group(1)
            if name not in _RELATIVE_LOCATIONS:
                self.in_system_header = name.startswith(config.SYSTEM_HEADER_PREFIXES)

    def _note_child(self, parent: _Frame, event: LineEvent) -> None:
        if isinstance(parent, _DefFrame):
            if event.head is TokenClass.BODY:
                parent.has_body = True
        elif isinstance(parent, LandNode) and parent.cls is TokenClass.MEMBER_REF:
            if not parent.child_seen:
                parent.child_seen = True
                parent.object_type = _first_type(event)

    def feed(self, event: LineEvent) -> None:
        if not event.raw.strip():
            return
        self._track_location(event.raw)
        depth = event.depth
        while self.stack and self.stack[-1][0] >= depth:
            self._close(self.stack.pop()[1])
        if self.stack and self.stack[-1][0] == depth - 1:
            self._note_child(self.stack[-1][1], event)

        cls = event.head
        if cls is None or cls is TokenClass.BODY:
            return

        frame: _Frame
        if cls is TokenClass.CLASS_DEF:
            name = _record_name(event)
            address = _own_address(event)
            if name and address:
                self.record_names[address] = name
            frame = _ClassFrame(name=name)
        elif cls in _DEF_CLASSES:
            frame = self._open_def(event, cls)
        else:
            node = LandNode(event=event, cls=cls)
            if self.stack and isinstance(self.stack[-1][1], LandNode):
                self.stack[-1][1].children.append(node)
            if cls in _CALL_CLASSES:
                node.call = _PendingCall(
                    order=len(self.calls),
                    scope=self._current_def(),
                    node=node,
                    in_system_header=self.in_system_header,
                )
                self.calls.append(node.call)
            elif cls is TokenClass.THIS_REF:
                scope = self._current_def()
                if scope is not None and scope.is_method and scope.class_name is None:
                    scope.class_name = class_from_type(_first_type(event))
            frame = node
        self.stack.append((depth, frame))

    def finish(self) -> ExtractionResult:
        while self.stack:
            self._close(self.stack.pop()[1])

        facts: list[CallFact] = []
        counters: dict[tuple[str, Optional[str]], int] = {}
        for pending in self.calls:
            if pending.in_system_header:
                continue
            scope = pending.scope
            if scope is not None:
                caller_scope, caller_class = scope.name or TOPLEVEL_SCOPE, scope.class_name
            else:
                caller_scope, caller_class = TOPLEVEL_SCOPE, _this_class(pending.node)
            key = (caller_scope, caller_class)
            seq = counters.get(key, 0)
            counters[key] = seq + 1
            facts.append(
                CallFact(
                    file=self.file,
                    caller_scope=caller_scope,
                    caller_class=caller_class,
                    seq=seq,
                    callee=pending.callee,
                    receiver_class=pending.receiver_class,
                    receiver_kind=pending.receiver_kind,
                    args=pending.args,
                    warning="; ".join(pending.warnings) or None,
                )
            )

        defs: list[FunctionDef] = []
        seen: set[tuple[str, Optional[str]]] = set()
        for frame in self.defs:
            if not frame.has_body or frame.in_system_header:
                continue
            key = (frame.name or "", frame.class_name)
            if key in seen:
                continue
            seen.add(key)
            defs.append(
                FunctionDef(
                    file=self.file,
                    name=frame.name,
                    class_name=frame.class_name,
                    kind=DefKind.MEMBER if frame.class_name else DefKind.FREE,
                )
            )
        return ExtractionResult(
            facts=facts,
            defs=defs,
            warnings=[f.warning for f in facts if f.warning],
        )


def extract_facts(
    dump: Union[bytes, str, Iterable[str]], file: str, lexicon: LexiconTable
) -> ExtractionResult:
    """Extract call facts and definitions from one AST dump.

    Args:
        dump: Dump content as bytes, text or an iterable of lines.
        file: Source-file name recorded on every fact and definition.
        lexicon: Dialect table used for scanning.

    Returns:
        All facts in dump order and all definitions. Malformed input never
        raises; unresolvable constructs carry warnings instead.
    """
    extractor = _Extractor(str(file))
    for event in scan_dump(dump, lexicon):
        extractor.feed(event)
    result = extractor.finish()
    logger.debug(
        "%s: %d facts, %d defs, %d warnings",
        file,
        len(result.facts),
        len(result.defs),
        len(result.warnings),
    )
    return result
