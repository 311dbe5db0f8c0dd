"""CSV interchange files between extraction and linking.

``calls.csv`` holds one row per call site with its arguments inline,
``defs.csv`` one row per definition. Both are UTF-8 with LF line endings and
RFC 4180 quoting. Rows are sorted, so equal results give equal bytes.
"""

from __future__ import annotations

import csv
import io
import logging
from pathlib import Path
from typing import Iterable, Iterator, Optional

from pydantic import ValidationError

from models.fact_models import (
    ArgKind,
    ArgValue,
    CallFact,
    DefKind,
    ExtractionResult,
    FactFilePair,
    FunctionDef,
    ReceiverKind,
)
from utils.io_utils import FactStoreIOError, replace_with_retry, write_temp

__all__ = [
    "CALLS_FILE",
    "CALLS_HEADER",
    "DEFS_FILE",
    "DEFS_HEADER",
    "FactFileError",
    "FactStoreIOError",
    "decode_args",
    "encode_args",
    "fact_pair",
    "join_escaped",
    "read_facts",
    "write_facts",
]

logger = logging.getLogger(__name__)

CALLS_FILE = "calls.csv"
DEFS_FILE = "defs.csv"
CALLS_HEADER = [
    "file",
    "caller_scope",
    "caller_class",
    "seq",
    "callee",
    "receiver_class",
    "receiver_kind",
    "arg_count",
    "args",
    "warning",
]
DEFS_HEADER = ["file", "name", "class", "kind"]

# model field -> CSV column, for error positions
_CALL_COLUMNS = {name: i + 1 for i, name in enumerate(CALLS_HEADER)}
_DEF_COLUMNS = {"file": 1, "name": 2, "class_name": 3, "kind": 4}


class FactFileError(ValueError):
    """A fact file does not follow its schema."""

    def __init__(self, path: Path | str, line: int, column: int, reason: str) -> None:
        super().__init__(f"{path}: line {line}, column {column}: {reason}")
        self.path = Path(path)
        self.line = line
        self.column = column


def fact_pair(directory: Path | str) -> FactFilePair:
    """The pair of fact files living in ``directory``."""
    base = Path(directory)
    return FactFilePair(calls_path=base / CALLS_FILE, defs_path=base / DEFS_FILE)


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("|", "\\|")


def join_escaped(items: Iterable[str]) -> str:
    """Join ``items`` with ``|``, escaping backslashes and ``|`` inside them."""
    return "|".join(_escape(item) for item in items)


def encode_args(args: Iterable[ArgValue]) -> str:
    """Join arguments as ``kind=display`` cells separated by ``|``.

    Backslashes and ``|`` inside displays are escaped with a backslash.
    """
    return join_escaped(f"{arg.kind.value}={arg.display}" for arg in args)


def _split_unescaped(cell: str) -> Iterator[str]:
    part: list[str] = []
    chars = iter(cell)
    for ch in chars:
        if ch == "\\":
            part.append(next(chars, ""))
        elif ch == "|":
            yield "".join(part)
            part = []
        else:
            part.append(ch)
    yield "".join(part)


def decode_args(cell: str) -> list[ArgValue]:
    """Inverse of :func:`encode_args`.

    Raises:
        ValueError: An item has no ``=`` or names an unknown argument kind.
    """
    if not cell:
        return []
    values = []
    for item in _split_unescaped(cell):
        kind_name, sep, display = item.partition("=")
        if not sep:
            raise ValueError(f"argument {item!r} is not kind=display")
        kind = ArgKind(kind_name)
        owner = display.rpartition(".")[0] if kind is ArgKind.MEMBER_VAR else None
        values.append(ArgValue(kind=kind, display=display, object=owner))
    return values


def _render_csv(rows: Iterable[list[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerows(rows)
    return buffer.getvalue()


def _call_row(fact: CallFact) -> list[str]:
    return [
        fact.file,
        fact.caller_scope,
        fact.caller_class or "",
        str(fact.seq),
        fact.callee,
        fact.receiver_class or "",
        fact.receiver_kind.value,
        str(fact.arity),
        encode_args(fact.args),
        fact.warning or "",
    ]


def _def_row(definition: FunctionDef) -> list[str]:
    return [
        definition.file,
        definition.name,
        definition.class_name or "",
        definition.kind.value,
    ]


def write_facts(result: ExtractionResult, out_dir: Path | str) -> FactFilePair:
    """Write ``result`` as ``calls.csv`` and ``defs.csv`` inside ``out_dir``.

    Both files are first written to temporary files in ``out_dir`` and then
    renamed into place, so readers never see a partial file.

    Raises:
        FactStoreIOError: ``out_dir`` or one of the files cannot be written.
    """
    pair = fact_pair(out_dir)
    canonical = result.canonical()
    calls_text = _render_csv([CALLS_HEADER, *(_call_row(f) for f in canonical.facts)])
    defs_text = _render_csv([DEFS_HEADER, *(_def_row(d) for d in canonical.defs)])

    directory = Path(out_dir)
    temps: list[Path] = []
    try:
        temps.append(write_temp(directory, calls_text))
        temps.append(write_temp(directory, defs_text))
        replace_with_retry(temps[0], pair.calls_path)
        replace_with_retry(temps[1], pair.defs_path)
    finally:
        for tmp in temps:
            if tmp.exists():
                tmp.unlink()
    logger.debug(
        "Wrote %d facts and %d defs to %s", len(canonical.facts), len(canonical.defs), directory
    )
    return pair


def _optional(cell: str) -> Optional[str]:
    return cell or None


def _read_rows(path: Path, header: list[str]) -> Iterator[tuple[int, list[str]]]:
    try:
        with path.open(encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            first = next(reader, None)
            if first != header:
                raise FactFileError(path, 1, 1, f"expected header {','.join(header)}")
            for row in reader:
                if len(row) != len(header):
                    raise FactFileError(
                        path,
                        reader.line_num,
                        min(len(row), len(header)) + 1,
                        f"expected {len(header)} columns, found {len(row)}",
                    )
                yield reader.line_num, row
    except csv.Error as err:
        raise FactFileError(path, 0, 0, str(err)) from err


def _validation_column(err: ValidationError, columns: dict[str, int]) -> int:
    loc = err.errors()[0].get("loc", ())
    return columns.get(str(loc[0]), 1) if loc else 1


def _parse_call(path: Path, line: int, row: list[str]) -> CallFact:
    file, scope, caller_class, seq, callee, recv_class, recv_kind, count, args, warning = row
    try:
        seq_value = int(seq)
    except ValueError:
        raise FactFileError(path, line, 4, f"seq {seq!r} is not an integer") from None
    try:
        kind = ReceiverKind(recv_kind)
    except ValueError:
        raise FactFileError(path, line, 7, f"unknown receiver_kind {recv_kind!r}") from None
    try:
        arg_values = decode_args(args)
    except (ValueError, ValidationError) as err:
        raise FactFileError(path, line, 9, str(err)) from None
    if count != str(len(arg_values)):
        raise FactFileError(
            path, line, 8, f"arg_count {count!r} does not match {len(arg_values)} arguments"
        )
    try:
        return CallFact(
            file=file,
            caller_scope=scope,
            caller_class=_optional(caller_class),
            seq=seq_value,
            callee=callee,
            receiver_class=_optional(recv_class),
            receiver_kind=kind,
            args=arg_values,
            warning=_optional(warning),
        )
    except ValidationError as err:
        column = _validation_column(err, _CALL_COLUMNS)
        raise FactFileError(path, line, column, str(err)) from None


def _parse_def(path: Path, line: int, row: list[str]) -> FunctionDef:
    file, name, class_name, kind = row
    try:
        return FunctionDef(
            file=file, name=name, class_name=_optional(class_name), kind=DefKind(kind)
        )
    except ValueError as err:
        column = (
            _validation_column(err, _DEF_COLUMNS) if isinstance(err, ValidationError) else 4
        )
        raise FactFileError(path, line, column, str(err)) from None


def read_facts(pair: FactFilePair) -> ExtractionResult:
    """Load the result stored in ``pair``.

    Raises:
        FactFileError: A row violates the schema; the message names the file,
            line and column.
        OSError: A file cannot be opened.
    """
    facts = [_parse_call(pair.calls_path, n, row) for n, row in _read_rows(pair.calls_path, CALLS_HEADER)]
    defs = [_parse_def(pair.defs_path, n, row) for n, row in _read_rows(pair.defs_path, DEFS_HEADER)]
    return ExtractionResult(
        facts=facts, defs=defs, warnings=[f.warning for f in facts if f.warning]
    )

