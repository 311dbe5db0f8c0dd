# config.py
"""Global configuration for islandcg.

Reads settings from a local .env file or the environment and exposes them
as module constants. Command-line flags override every value here.
"""
import os

# load .env if present
try:
    from dotenv import load_dotenv

    load_dotenv()
except ImportError:
    pass


def _int_env(name: str, default: int) -> int:
    """Read an integer variable, falling back to ``default`` on bad input."""
    raw = os.getenv(name, "").strip()
    try:
        return int(raw) if raw else default
    except ValueError:
        return default


# Extraction
DEFAULT_DIALECT = os.getenv("ISLANDCG_DIALECT", "cpp")
# extra directory searched for <dialect>.tsv before the shipped tables
LEXICON_DIR = os.getenv("ISLANDCG_LEXICON_DIR", "").strip("\"' ")
DUMP_SUFFIXES = tuple(
    s.strip()
    for s in os.getenv("ISLANDCG_DUMP_SUFFIXES", ".ast,.dump,.txt").split(",")
    if s.strip()
)
EXTRACT_WORKERS = max(1, _int_env("ISLANDCG_WORKERS", 4))
# declarations and calls located under these paths are library code
SYSTEM_HEADER_PREFIXES = tuple(
    p.strip()
    for p in os.getenv(
        "ISLANDCG_SYSTEM_PREFIXES",
        "/usr/include/,/usr/lib/,/usr/local/include/,/opt/homebrew/,/Library/Developer/,/Applications/Xcode",
    ).split(",")
    if p.strip()
)

# Output
OUT_DIR = os.getenv("ISLANDCG_OUT_DIR", "./facts")

# Linking
MAX_DEPTH = _int_env("ISLANDCG_MAX_DEPTH", 100)
MAX_NODES = _int_env("ISLANDCG_MAX_NODES", 100_000)

# Benchmark
BENCH_REPEATS = max(1, _int_env("ISLANDCG_BENCH_REPEATS", 3))

LOG_LEVEL = os.getenv("ISLANDCG_LOG_LEVEL", "INFO").upper()
