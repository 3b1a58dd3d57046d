"""Line-delimited JSON helpers used by every file format in the package."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterator


def dumps_record(record: dict[str, Any]) -> str:
    """Serialize one record to a single stable line (no trailing newline)."""
    return json.dumps(record, ensure_ascii=False, separators=(", ", ": "))


def read_jsonl(path: str | Path) -> Iterator[tuple[int, str]]:
    """Yield (1-based line number, raw line) for every non-blank line."""
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line.strip():
                yield line_no, line


def write_jsonl(path: str | Path, records: list[dict[str, Any]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(dumps_record(record) + "\n")


def append_jsonl_line(path: str | Path, record: dict[str, Any]) -> None:
    """Append one record and flush, so a crash never leaves a torn record behind
    more than the final line."""
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(dumps_record(record) + "\n")
        fh.flush()
