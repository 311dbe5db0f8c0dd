"""File output helpers: temp-file writes with a retried atomic rename."""

from __future__ import annotations

import logging
import os
import tempfile
from pathlib import Path

from tenacity import (
    retry,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

logger = logging.getLogger(__name__)


class FactStoreIOError(OSError):
    """Raised when an output file cannot be written; names the path."""

    def __init__(self, path: Path | str, reason: object) -> None:
        super().__init__(f"cannot write {path}: {reason}")
        self.path = Path(path)


# a virus scanner or indexer may hold the target briefly on some platforms
@retry(
    reraise=True,
    stop=stop_after_attempt(3),
    wait=wait_exponential(multiplier=0.05, min=0.05, max=0.5),
    retry=retry_if_exception_type(PermissionError),
)
def _replace(src: str, dst: str) -> None:
    os.replace(src, dst)


def replace_with_retry(src: Path | str, dst: Path | str) -> None:
    """Atomically move ``src`` over ``dst``, retrying transient lock errors.

    Raises:
        FactStoreIOError: The rename still failed after all attempts.
    """
    try:
        _replace(str(src), str(dst))
    except OSError as err:
        logger.error("Rename %s -> %s failed: %s", src, dst, err)
        raise FactStoreIOError(dst, err) from err


def write_temp(directory: Path, text: str, suffix: str = ".tmp") -> Path:
    """Write ``text`` to a fresh temp file inside ``directory``.

    The file uses UTF-8 and LF line endings; the caller renames it into place.
    """
    try:
        directory.mkdir(parents=True, exist_ok=True)
        fd, name = tempfile.mkstemp(dir=directory, suffix=suffix)
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as err:
        raise FactStoreIOError(directory, err) from err
    return Path(name)


def atomic_write_text(path: Path | str, text: str) -> Path:
    """Write ``text`` to ``path`` without ever leaving a partial file."""
    target = Path(path)
    tmp = write_temp(target.parent, text)
    try:
        replace_with_retry(tmp, target)
    finally:
        if tmp.exists():
            tmp.unlink()
    return target
