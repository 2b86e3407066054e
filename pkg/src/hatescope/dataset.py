"""CSV dataset loading with a configurable column map.

Released label files vary in schema, so the loader is told which column
holds the text and which five columns hold the numeric level codes. When
no id column exists the data-row index (0-based, as a string) is used.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

from .errors import InvalidLevel, IoError, SchemaError
from .labels import TARGETS, Comment, LabeledComment, LabelVector, Target

__all__ = ["ColumnMap", "load_dataset", "write_dataset"]


@dataclass(frozen=True)
class ColumnMap:
    """Names of the text, id, and per-target label columns in a CSV file."""

    text: str = "comment"
    id: Optional[str] = None
    labels: dict[Target, str] = field(
        default_factory=lambda: {t: t.slug for t in TARGETS}
    )

    def __post_init__(self):
        missing = [t.slug for t in TARGETS if t not in self.labels]
        if missing:
            raise SchemaError(f"column map lacks label columns for: {missing}")


def load_dataset(path: str, column_map: ColumnMap | None = None) -> list[LabeledComment]:
    """Read a labeled CSV into memory, validating level codes per row."""
    cmap = column_map or ColumnMap()
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        needed = [cmap.text] + [cmap.labels[t] for t in TARGETS]
        if cmap.id:
            needed.append(cmap.id)
        missing = [col for col in needed if col not in header]
        if missing:
            raise SchemaError(
                f"{path}: missing columns {missing}; header is {header}"
            )
        rows: list[LabeledComment] = []
        for index, row in enumerate(reader):
            codes = [
                _parse_code(row[cmap.labels[t]], index, cmap.labels[t])
                for t in TARGETS
            ]
            comment_id = row[cmap.id] if cmap.id else str(index)
            text = row[cmap.text] or ""
            if not text.strip():
                raise SchemaError(f"row {index}: empty text")
            rows.append(
                LabeledComment(
                    comment=Comment(id=comment_id, text=text),
                    labels=LabelVector.from_codes(codes),
                )
            )
    return rows


def write_dataset(path: str, rows: list[LabeledComment],
                  column_map: ColumnMap | None = None) -> None:
    """Write labeled comments back out in the same CSV shape."""
    cmap = column_map or ColumnMap()
    fieldnames = ([cmap.id] if cmap.id else []) + [cmap.text] + [
        cmap.labels[t] for t in TARGETS
    ]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for item in rows:
            record = {cmap.text: item.comment.text}
            if cmap.id:
                record[cmap.id] = item.comment.id
            for target, level in zip(TARGETS, item.labels):
                record[cmap.labels[target]] = int(level)
            writer.writerow(record)


def _parse_code(value: str, row: int, column: str) -> int:
    text = (value or "").strip()
    try:
        number = float(text)
    except ValueError:
        raise InvalidLevel(
            f"row {row}, column {column!r}: not a level code: {value!r}"
        ) from None
    code = int(number)
    if code != number or code not in (0, 1, 2, 3):
        raise InvalidLevel(
            f"row {row}, column {column!r}: level must be one of 0,1,2,3, got {value!r}"
        )
    return code
