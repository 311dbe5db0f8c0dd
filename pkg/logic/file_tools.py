"""Locate and read input files: AST dumps for extraction, fact pairs for linking.

Dumps are read as bytes and decoded tolerantly, so a dump with broken
encoding still yields text. Directory inputs expand to their dump files
(suffixes from ``ISLANDCG_DUMP_SUFFIXES``) or fact pairs, in sorted order.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable, Sequence

from models.fact_models import FactFilePair
from services.fact_store import CALLS_FILE, fact_pair
from utils import config
from utils.text_cleanup import decode_dump

__all__ = [
    "discover_fact_pairs",
    "expand_inputs",
    "output_dirs",
    "read_dump",
    "source_name",
]

logger = logging.getLogger(__name__)


def source_name(path: Path | str, suffixes: Sequence[str] | None = None) -> str:
    """Return the source-file name a dump belongs to.

    Args:
        path: Dump file path, e.g. ``dumps/Contact.cpp.ast``.
        suffixes: Dump suffixes to drop; defaults to the configured ones.

    Returns:
        The file name without its dump suffix (``Contact.cpp``).
    """
    name = Path(path).name
    for suffix in suffixes if suffixes is not None else config.DUMP_SUFFIXES:
        if suffix and name.endswith(suffix) and len(name) > len(suffix):
            return name[: -len(suffix)]
    return name


def read_dump(path: Path | str) -> str:
    """Read one dump file as text.

    Raises:
        FileNotFoundError: ``path`` does not exist.
        OSError: ``path`` cannot be read.
    """
    data = Path(path).read_bytes()
    return decode_dump(data)


def expand_inputs(paths: Iterable[Path | str], suffixes: Sequence[str] | None = None) -> list[Path]:
    """Expand directories into their dump files; files are kept as given.

    Raises:
        FileNotFoundError: An input does not exist.
    """
    wanted = tuple(suffixes if suffixes is not None else config.DUMP_SUFFIXES)
    files: list[Path] = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            found = sorted(p for p in path.iterdir() if p.is_file() and p.name.endswith(wanted))
            if not found:
                logger.warning("No dump files (%s) in %s", ", ".join(wanted), path)
            files.extend(found)
        elif path.is_file():
            files.append(path)
        else:
            raise FileNotFoundError(f"input not found: {path}")
    return files


def output_dirs(inputs: Sequence[Path], out_dir: Path | str) -> list[Path]:
    """One output directory per input, named after it; clashes get ``-2``, ``-3``…"""
    base = Path(out_dir)
    taken: set[str] = set()
    dirs = []
    for path in inputs:
        name = path.name
        candidate, n = name, 2
        while candidate in taken:
            candidate = f"{name}-{n}"
            n += 1
        taken.add(candidate)
        dirs.append(base / candidate)
    return dirs


def discover_fact_pairs(paths: Iterable[Path | str]) -> list[FactFilePair]:
    """Find fact-file pairs under ``paths``.

    Each path may be a directory holding ``calls.csv``, a ``calls.csv`` file,
    or a directory whose sub-directories hold pairs.

    Raises:
        FileNotFoundError: A path does not exist or holds no fact files.
    """
    pairs: list[FactFilePair] = []
    for raw in paths:
        path = Path(raw)
        if path.is_file() and path.name == CALLS_FILE:
            pairs.append(fact_pair(path.parent))
        elif path.is_dir() and (path / CALLS_FILE).is_file():
            pairs.append(fact_pair(path))
        elif path.is_dir():
            found = sorted(p for p in path.iterdir() if (p / CALLS_FILE).is_file())
            if not found:
                raise FileNotFoundError(f"no {CALLS_FILE} under {path}")
            pairs.extend(fact_pair(p) for p in found)
        else:
            raise FileNotFoundError(f"fact files not found: {path}")
    return pairs
