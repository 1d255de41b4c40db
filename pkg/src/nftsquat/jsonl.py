"""Line-delimited JSON readers and writers.

Readers accept plain or gzip-compressed files and report the offending line
number on parse failures.  Writers emit one compact JSON object per line in
a stable key order so that re-runs are byte-identical.
"""

from __future__ import annotations

import gzip
import io
import json
from pathlib import Path
from typing import Callable, Iterable, Iterator, TypeVar

from .errors import ValidationError

T = TypeVar("T")


def _open_text(path: Path) -> io.TextIOBase:
    if str(path).endswith(".gz"):
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def iter_json_lines(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, parsed_object) pairs, skipping blank lines."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"input file not found: {path}")
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: malformed JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise ValidationError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def read_records(path: str | Path, parser: Callable[[dict], T]) -> list[T]:
    """Parse every line of *path* with *parser*, tagging errors with line numbers."""
    out: list[T] = []
    for lineno, obj in iter_json_lines(path):
        try:
            out.append(parser(obj))
        except ValidationError as exc:
            raise ValidationError(f"{Path(path)}:{lineno}: {exc}") from None
        except (ValueError, KeyError, TypeError) as exc:
            raise ValidationError(f"{Path(path)}:{lineno}: bad record: {exc}") from None
    return out


def write_records(path: str | Path, dicts: Iterable[dict]) -> int:
    """Write dicts as one JSON object per line; returns the record count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for d in dicts:
            fh.write(json.dumps(d, ensure_ascii=False, separators=(",", ":")))
            fh.write("\n")
            count += 1
    return count


def write_json(path: str | Path, obj: dict) -> None:
    """Write a single pretty-printed JSON document with sorted keys."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def read_address_lines(path: str | Path) -> set[str]:
    """Read a one-address-per-line file ('#' starts a comment)."""
    from .records import validate_address

    path = Path(path)
    if not path.exists():
        raise ValidationError(f"input file not found: {path}")
    out: set[str] = set()
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            entry = line.split("#", 1)[0].strip()
            if not entry:
                continue
            try:
                out.add(validate_address(entry))
            except ValidationError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
    return out
