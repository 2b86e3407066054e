"""Windowed label counts and latency statistics over prediction records.

Windows are tumbling event-time buckets aligned to epoch multiples of
the width, keyed on each record's processed timestamp. A record whose
window has already been sealed by the watermark (2x width behind the
furthest event time seen) is diverted to a late side channel instead of
mutating a published window.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ..errors import EmptyInput
from ..labels import TARGETS, HatredLevel, Target
from .records import PredictionRecord

__all__ = [
    "WindowAggregate",
    "LatencyStats",
    "LatencyReport",
    "window_aggregate",
    "latency_report",
    "aggregates_to_csv",
]

COUNTED_LEVELS = (HatredLevel.CLEAN, HatredLevel.OFFENSIVE, HatredLevel.HATE)


@dataclass(frozen=True)
class WindowAggregate:
    """Counts of detected (target, level) cells in one window."""

    window_start: int  # epoch ms, multiple of width_ms
    width_ms: int
    counts: Mapping[tuple[Target, HatredLevel], int]

    @property
    def window_end(self) -> int:
        return self.window_start + self.width_ms

    def total(self) -> int:
        return sum(self.counts.values())


def window_aggregate(
    records: Iterable[PredictionRecord],
    width_s: int = 60,
) -> tuple[list[WindowAggregate], list[PredictionRecord]]:
    """Bucket records into tumbling windows; returns (windows, late).

    Records are consumed in arrival order; the watermark is the furthest
    processed_ts seen so far. Windows come back sorted by start time.
    Conservation: total cells across windows plus terms on late records
    equals the total terms passed in.
    """
    if width_s < 1:
        raise ValueError(f"window width must be >= 1 second, got {width_s}")
    width_ms = width_s * 1000
    buckets: dict[int, dict[tuple[Target, HatredLevel], int]] = {}
    late: list[PredictionRecord] = []
    watermark = -math.inf
    for record in records:
        ts = record.processed_ts
        watermark = max(watermark, ts)
        start = (ts // width_ms) * width_ms
        if watermark - start >= 2 * width_ms:
            late.append(record)
            continue
        cells = buckets.setdefault(start, {})
        for term in record.terms:
            key = (term.target, term.level)
            cells[key] = cells.get(key, 0) + 1
    windows = [
        WindowAggregate(window_start=start, width_ms=width_ms, counts=cells)
        for start, cells in sorted(buckets.items())
    ]
    return windows, late


@dataclass(frozen=True)
class LatencyStats:
    """The six per-model timing statistics, milliseconds."""

    model_id: str
    count: int
    min: float
    q25: float
    median: float
    mean: float
    q75: float
    max: float


@dataclass(frozen=True)
class LatencyReport:
    per_model: dict[str, LatencyStats]

    def rows(self) -> list[LatencyStats]:
        return [self.per_model[m] for m in sorted(self.per_model)]


def _nearest_rank(sorted_values: Sequence[float], q: float) -> float:
    rank = max(1, math.ceil(q * len(sorted_values)))
    return sorted_values[rank - 1]


def latency_report(records: Sequence[PredictionRecord]) -> LatencyReport:
    """Nearest-rank quantiles and mean of latency, grouped by model."""
    if not records:
        raise EmptyInput("latency report needs at least one record")
    by_model: dict[str, list[float]] = {}
    for record in records:
        by_model.setdefault(record.model_id, []).append(record.latency_ms)
    per_model = {}
    for model_id, values in by_model.items():
        values.sort()
        # Summation rounding can push the mean one ulp past the extremes;
        # clamp so min <= mean <= max holds as documented.
        mean = min(max(math.fsum(values) / len(values), values[0]), values[-1])
        per_model[model_id] = LatencyStats(
            model_id=model_id,
            count=len(values),
            min=values[0],
            q25=_nearest_rank(values, 0.25),
            median=_nearest_rank(values, 0.5),
            mean=mean,
            q75=_nearest_rank(values, 0.75),
            max=values[-1],
        )
    return LatencyReport(per_model=per_model)


def aggregates_to_csv(windows: Sequence[WindowAggregate]) -> str:
    """Flatten windows to (window_start, target, level, count) rows."""
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["window_start", "target", "level", "count"])
    for window in windows:
        for target in TARGETS:
            for level in COUNTED_LEVELS:
                count = window.counts.get((target, level), 0)
                if count:
                    writer.writerow(
                        [window.window_start, target.slug, level.name.lower(), count]
                    )
    return out.getvalue()
