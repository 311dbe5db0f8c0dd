"""Schemas for lexer output, extracted call facts and fact files."""

from __future__ import annotations

import re
from enum import Enum
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional

from pydantic import BaseModel, root_validator, validator

TOPLEVEL_SCOPE = "<toplevel>"
UNRESOLVED_CALLEE = "<unresolved>"
UNKNOWN_DISPLAY = "<unknown>"

# identifier-shaped lexemes; interior ':' '~' '<' '>' keep qualified names whole
DEFAULT_WORD_PATTERN = (
    r"[A-Za-z_~][A-Za-z0-9_:~<>]*"
    r"|0x[0-9a-fA-F]+"
    r"|[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?"
)
DEFAULT_DQUOTE_PATTERN = r'"(?:[^"\\\n]|\\.)*"'
DEFAULT_SQUOTE_PATTERN = r"'[^'\n]*'"


class TokenClass(str, Enum):
    """Lexeme classes produced by the island lexer."""

    CALL = "CALL"
    MEMBER_CALL = "MEMBER_CALL"
    ARGUMENT = "ARGUMENT"
    MEMBER_REF = "MEMBER_REF"
    THIS_REF = "THIS_REF"
    FUNC_DEF = "FUNC_DEF"
    METHOD_DEF = "METHOD_DEF"
    CLASS_DEF = "CLASS_DEF"
    SUBSCRIPT = "SUBSCRIPT"
    BINARY_OP = "BINARY_OP"
    UNARY_OP = "UNARY_OP"
    NUMBER = "NUMBER"
    STRING = "STRING"
    BODY = "BODY"
    TYPE_TEXT = "TYPE_TEXT"
    WORD = "WORD"


class Token(NamedTuple):
    """One classified lexeme; ``column`` is the 0-based offset in its line."""

    cls: TokenClass
    lexeme: str
    column: int
    keyword: bool = False


class LineEvent(NamedTuple):
    """All tokens of one dump line together with its tree depth."""

    depth: int
    tokens: List[Token]
    raw: str

    @property
    def head(self) -> Optional[TokenClass]:
        """Class of the node-kind keyword opening the line, ``None`` for water."""
        if self.tokens and self.tokens[0].keyword:
            return self.tokens[0].cls
        return None


def token_text(token: Token) -> str:
    """Return the lexeme without surrounding quotes."""
    if token.cls in (TokenClass.TYPE_TEXT, TokenClass.STRING) and not token.keyword:
        return token.lexeme[1:-1]
    return token.lexeme


class LexiconTable(BaseModel):
    """Keyword table and lexeme patterns for one dump dialect."""

    dialect_name: str
    keyword_map: Dict[str, TokenClass]
    word_pattern: str = DEFAULT_WORD_PATTERN
    dquote_pattern: str = DEFAULT_DQUOTE_PATTERN
    squote_pattern: str = DEFAULT_SQUOTE_PATTERN

    class Config:
        allow_mutation = False

    @root_validator(skip_on_failure=True)
    def _keywords_are_words(cls, values: dict) -> dict:
        word_re = re.compile(values["word_pattern"])
        for keyword, token_class in values["keyword_map"].items():
            if not word_re.fullmatch(keyword):
                raise ValueError(f"keyword {keyword!r} is not identifier-shaped")
            if token_class in (TokenClass.WORD, TokenClass.TYPE_TEXT):
                raise ValueError(f"keyword {keyword!r} cannot map to {token_class.value}")
        return values


class ArgKind(str, Enum):
    """The eight argument shapes a call site can carry."""

    VARIABLE = "Variable"
    STRING_LIT = "StringLit"
    NUMBER_LIT = "NumberLit"
    SUBSCRIPT = "Subscript"
    MEMBER_VAR = "MemberVar"
    NESTED_CALL = "NestedCall"
    BINARY_OP = "BinaryOp"
    UNARY_OP = "UnaryOp"


class ReceiverKind(str, Enum):
    THIS_IMPLIED = "this_implied"
    MEMBER_VARIABLE = "member_variable"
    NAMED_OBJECT = "named_object"
    NONE = "none"


class DefKind(str, Enum):
    MEMBER = "member"
    FREE = "free"


class ArgValue(BaseModel):
    """One classified call argument."""

    kind: ArgKind
    display: str
    object: Optional[str] = None

    @validator("display")
    def _display_not_empty(cls, value: str) -> str:
        if not value:
            raise ValueError("display must not be empty")
        return value

    @root_validator(skip_on_failure=True)
    def _member_has_object(cls, values: dict) -> dict:
        if values["kind"] is ArgKind.MEMBER_VAR and not values.get("object"):
            raise ValueError("MemberVar arguments need an owning object")
        return values


class CallFact(BaseModel):
    """One call site found in a dump."""

    file: str
    caller_scope: str
    caller_class: Optional[str] = None
    seq: int
    callee: str
    receiver_class: Optional[str] = None
    receiver_kind: ReceiverKind = ReceiverKind.NONE
    args: List[ArgValue] = []
    warning: Optional[str] = None

    @validator("seq")
    def _seq_not_negative(cls, value: int) -> int:
        if value < 0:
            raise ValueError("seq must be >= 0")
        return value

    @root_validator(skip_on_failure=True)
    def _receiver_consistent(cls, values: dict) -> dict:
        kind_is_none = values["receiver_kind"] is ReceiverKind.NONE
        if kind_is_none != (values.get("receiver_class") is None):
            raise ValueError("receiver_kind 'none' goes with an absent receiver_class")
        return values

    @property
    def arity(self) -> int:
        return len(self.args)


class FunctionDef(BaseModel):
    """A function or method definition seen in a dump."""

    file: str
    name: str
    class_name: Optional[str] = None
    kind: DefKind = DefKind.FREE

    @root_validator(skip_on_failure=True)
    def _member_has_class(cls, values: dict) -> dict:
        is_member = values["kind"] is DefKind.MEMBER
        if is_member != bool(values.get("class_name")):
            raise ValueError("member definitions need a class, free ones must not have one")
        return values


def fact_sort_key(fact: CallFact) -> tuple:
    return (fact.file, fact.caller_scope, fact.seq, fact.caller_class or "")


def def_sort_key(definition: FunctionDef) -> tuple:
    return (definition.file, definition.name, definition.class_name or "")


class ExtractionResult(BaseModel):
    """Facts, definitions and warnings of one or more dumps."""

    facts: List[CallFact] = []
    defs: List[FunctionDef] = []
    warnings: List[str] = []

    def canonical(self) -> "ExtractionResult":
        """Return a copy in file order, the order the CSV files use."""
        facts = sorted(self.facts, key=fact_sort_key)
        return ExtractionResult(
            facts=facts,
            defs=sorted(self.defs, key=def_sort_key),
            warnings=[f.warning for f in facts if f.warning],
        )


class FactFilePair(BaseModel):
    """Locations of the calls and definitions CSV files for one dump."""

    calls_path: Path
    defs_path: Path
