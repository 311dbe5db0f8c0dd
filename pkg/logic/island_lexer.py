"""Table-driven island lexer for textual compiler AST dumps.

Only the lexicon of interest becomes land: node-kind keywords from the
dialect table, identifier-shaped words, double-quoted string literals and
single-quoted type annotations. Every other character is water and is
skipped silently, so scanning never fails on any input.

Dialect tables are plain text files, one ``keyword<TAB>TOKENCLASS`` pair per
line with ``#`` comments. The shipped ``cpp`` and ``objc`` tables live in
``logic/lexicons``; ``ISLANDCG_LEXICON_DIR`` can add more.
"""

from __future__ import annotations

import functools
import logging
import re
from pathlib import Path
from typing import Iterable, Iterator

from pydantic import ValidationError

from models.fact_models import LexiconTable, LineEvent, Token, TokenClass
from utils import config
from utils.text_cleanup import strip_ansi

__all__ = [
    "LexiconError",
    "available_dialects",
    "depth_of",
    "load_lexicon",
    "scan_dump",
    "scan_line",
    "strip_ansi",
]

logger = logging.getLogger(__name__)

SHIPPED_LEXICON_DIR = Path(__file__).resolve().parent / "lexicons"

# tree connectors drawn in front of the node kind: "| |-", "  `-", "| '-"
_CONNECTOR_RE = re.compile(r"[ |`'\-]*")
_HEX_RE = re.compile(r"0x[0-9a-fA-F]+\Z")


class LexiconError(ValueError):
    """Raised for unknown dialects or malformed dialect files."""


def depth_of(line: str) -> int:
    """Return the tree depth encoded by the connector prefix of ``line``.

    Two prefix columns make one level; a line without prefix is depth 0.
    """
    return _CONNECTOR_RE.match(line).end() // 2  # type: ignore[union-attr]


@functools.lru_cache(maxsize=32)
def _master_pattern(word: str, dquote: str, squote: str) -> re.Pattern[str]:
    return re.compile(f"(?P<dq>{dquote})|(?P<sq>{squote})|(?P<word>{word})")


def _is_decl_name(tokens: list[Token], inner: str) -> bool:
    """Tell whether a quoted run sits in the ``<DeclKind> 0xADDR 'name'`` slot."""
    if len(tokens) < 3 or not inner:
        return False
    address, kind = tokens[-1], tokens[-2]
    if address.cls is not TokenClass.WORD or not _HEX_RE.match(address.lexeme):
        return False
    if kind.cls is not TokenClass.WORD or not kind.lexeme[0].isalpha():
        return False
    return (inner[0].isalpha() or inner[0] in "_~") and all(
        ch.isalnum() or ch in "_:~" for ch in inner
    )


def scan_line(line: str, lexicon: LexiconTable) -> LineEvent:
    """Tokenize one ANSI-free dump line.

    Args:
        line: A single line of dump text.
        lexicon: Dialect table deciding which words are keywords.

    Returns:
        The line's depth and its land tokens in column order. Characters that
        match no pattern are water and produce nothing.
    """
    start = _CONNECTOR_RE.match(line).end()  # type: ignore[union-attr]
    pattern = _master_pattern(
        lexicon.word_pattern, lexicon.dquote_pattern, lexicon.squote_pattern
    )
    keywords = lexicon.keyword_map
    tokens: list[Token] = []
    for match in pattern.finditer(line, start):
        lexeme = match.group()
        if not lexeme:
            continue
        column = match.start()
        group = match.lastgroup
        if group == "word":
            token_class = keywords.get(lexeme)
            if token_class is not None:
                tokens.append(Token(token_class, lexeme, column, True))
            else:
                tokens.append(Token(TokenClass.WORD, lexeme, column))
        elif group == "dq":
            tokens.append(Token(TokenClass.STRING, lexeme, column))
        else:
            inner = lexeme[1:-1]
            if inner not in keywords and _is_decl_name(tokens, inner):
                tokens.append(Token(TokenClass.WORD, inner, column + 1))
            else:
                tokens.append(Token(TokenClass.TYPE_TEXT, lexeme, column))
    return LineEvent(start // 2, tokens, line)


def scan_dump(dump: bytes | str | Iterable[str], lexicon: LexiconTable) -> Iterator[LineEvent]:
    """Yield one :class:`LineEvent` per line of ``dump``.

    ``dump`` may be raw bytes, a complete text or an iterable of lines (for
    example an open file). ANSI color codes are removed first.
    """
    if isinstance(dump, (bytes, str)):
        lines: Iterable[str] = strip_ansi(dump).splitlines()
    else:
        lines = (strip_ansi(raw).rstrip("\r\n") for raw in dump)
    for line in lines:
        yield scan_line(line, lexicon)


def _search_dirs() -> list[Path]:
    dirs = [Path(config.LEXICON_DIR)] if config.LEXICON_DIR else []
    dirs.append(SHIPPED_LEXICON_DIR)
    return dirs


def available_dialects() -> list[str]:
    """Return the names of all dialect tables that can be loaded."""
    names = {
        path.stem
        for directory in _search_dirs()
        if directory.is_dir()
        for path in directory.glob("*.tsv")
    }
    return sorted(names)


def _resolve_table(dialect: str | Path) -> Path:
    candidate = Path(dialect)
    if candidate.suffix == ".tsv" and candidate.is_file():
        return candidate
    for directory in _search_dirs():
        path = directory / f"{dialect}.tsv"
        if path.is_file():
            return path
    raise LexiconError(
        f"unknown dialect {str(dialect)!r}; available: {', '.join(available_dialects())}"
    )


def parse_lexicon(text: str, dialect_name: str, source: str = "<text>") -> LexiconTable:
    """Build a :class:`LexiconTable` from dialect-file text.

    Raises:
        LexiconError: A line is not a ``keyword<TAB>TOKENCLASS`` pair or names
            an unknown token class.
    """
    keyword_map: dict[str, TokenClass] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split("\t") if f.strip()]
        if len(fields) != 2:
            raise LexiconError(f"{source}:{lineno}: expected keyword<TAB>TOKENCLASS")
        keyword, class_name = fields
        try:
            token_class = TokenClass[class_name]
        except KeyError as err:
            raise LexiconError(
                f"{source}:{lineno}: unknown token class {class_name!r}"
            ) from err
        if keyword in keyword_map and keyword_map[keyword] is not token_class:
            logger.warning("%s:%d: keyword %s redefined", source, lineno, keyword)
        keyword_map[keyword] = token_class
    try:
        return LexiconTable(dialect_name=dialect_name, keyword_map=keyword_map)
    except ValidationError as err:
        raise LexiconError(f"{source}: {err}") from err


@functools.lru_cache(maxsize=16)
def _load_table(path: str) -> LexiconTable:
    table_path = Path(path)
    try:
        text = table_path.read_text(encoding="utf-8")
    except OSError as err:
        raise LexiconError(f"cannot read dialect table {path}: {err}") from err
    table = parse_lexicon(text, table_path.stem, source=path)
    logger.debug("Loaded dialect %s with %d keywords", table.dialect_name, len(table.keyword_map))
    return table


def load_lexicon(dialect: str | Path | None = None) -> LexiconTable:
    """Load a dialect table by name (``cpp``, ``objc``) or by ``.tsv`` path.

    Tables are immutable and cached, so repeated loads share one instance.
    """
    return _load_table(str(_resolve_table(dialect or config.DEFAULT_DIALECT)))
