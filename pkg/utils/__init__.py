from .text_cleanup import decode_dump, strip_ansi
from .io_utils import atomic_write_text, replace_with_retry

__all__ = ["atomic_write_text", "decode_dump", "replace_with_retry", "strip_ansi"]
