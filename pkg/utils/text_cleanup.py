"""Utility functions to sanitize raw compiler dump text."""

from __future__ import annotations

import re

__all__ = ["decode_dump", "strip_ansi"]

# CSI sequences (colors, cursor moves) plus the two-byte ESC forms
_ANSI_RE = re.compile(r"\x1b(?:\[[0-?]*[ -/]*[@-~]|[@-Z\\-_])")


def decode_dump(data: bytes | str) -> str:
    """Decode dump bytes as UTF-8, replacing invalid sequences.

    Args:
        data: Raw bytes read from a dump file, or text that is already decoded.

    Returns:
        The decoded text. Decoding never fails.
    """
    if isinstance(data, str):
        return data
    return data.decode("utf-8", errors="replace")


def strip_ansi(text: bytes | str) -> str:
    """Remove ANSI escape sequences from ``text``.

    Parameters
    ----------
    text: bytes | str
        Dump content, possibly colored by the compiler.

    Returns
    -------
    str
        The same content without escape sequences. Applying the function
        twice gives the same result as applying it once.
    """
    cleaned = decode_dump(text)
    # removal can splice a new sequence together, repeat until stable
    previous = None
    while previous != cleaned:
        previous, cleaned = cleaned, _ANSI_RE.sub("", cleaned)
    return cleaned
