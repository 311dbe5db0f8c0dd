import os
from pathlib import Path
from unittest.mock import patch

import pytest

from utils.io_utils import FactStoreIOError, atomic_write_text, replace_with_retry

_real_replace = os.replace


def test_atomic_write_leaves_only_target(tmp_path: Path) -> None:
    target = atomic_write_text(tmp_path / "out" / "graph.dot", "digraph {}\n")
    assert target.read_text(encoding="utf-8") == "digraph {}\n"
    assert [p.name for p in target.parent.iterdir()] == ["graph.dot"]


def test_transient_lock_is_retried(tmp_path: Path) -> None:
    src, dst = tmp_path / "a.tmp", tmp_path / "a.csv"
    src.write_text("x", encoding="utf-8")
    calls = {"n": 0}

    def flaky(a: str, b: str) -> None:
        calls["n"] += 1
        if calls["n"] == 1:
            raise PermissionError("locked")
        _real_replace(a, b)

    with patch("utils.io_utils.os.replace", side_effect=flaky):
        replace_with_retry(src, dst)
    assert calls["n"] == 2
    assert dst.read_text(encoding="utf-8") == "x"


def test_persistent_failure_names_path(tmp_path: Path) -> None:
    src = tmp_path / "a.tmp"
    src.write_text("x", encoding="utf-8")
    with patch("utils.io_utils.os.replace", side_effect=PermissionError("locked")) as mocked:
        with pytest.raises(FactStoreIOError) as err:
            replace_with_retry(src, tmp_path / "a.csv")
    assert mocked.call_count == 3
    assert "a.csv" in str(err.value)
    assert isinstance(err.value, OSError)


def test_failed_write_removes_temp_file(tmp_path: Path) -> None:
    with patch("utils.io_utils.os.replace", side_effect=OSError("disk full")):
        with pytest.raises(FactStoreIOError):
            atomic_write_text(tmp_path / "edges.csv", "a,b\n")
    assert list(tmp_path.iterdir()) == []
