"""Pull-based comment sources feeding the pipeline.

Sources are plain iterators of Comment values with non-decreasing
timestamps. The replay source reads a newline-delimited JSON capture
and re-times it by a speed factor; the polling source wraps any
callable that fetches fresh comments for a stream id, standing in for
a live platform crawler.
"""

from __future__ import annotations

import json
import math
import time
from typing import Callable, Iterator, Optional, Sequence

from ..errors import IoError, ParseError
from ..labels import Comment

__all__ = ["ReplaySource", "replay_source", "MockPollingSource", "load_replay_file"]


def load_replay_file(path: str) -> list[Comment]:
    """Parse and validate a replay capture: {"id", "ts", "text"} per line.

    Timestamps must be non-decreasing; violations and malformed lines
    are load-time errors naming the offending 1-based line.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise IoError(f"cannot read replay file {path}: {exc}") from exc
    comments: list[Comment] = []
    last_ts: Optional[int] = None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from None
        if not isinstance(record, dict):
            raise ParseError(f"{path}:{lineno}: record must be an object")
        missing = [k for k in ("id", "ts", "text") if k not in record]
        if missing:
            raise ParseError(f"{path}:{lineno}: missing fields {missing}")
        try:
            ts = int(record["ts"])
        except (TypeError, ValueError):
            raise ParseError(f"{path}:{lineno}: ts must be an integer") from None
        if last_ts is not None and ts < last_ts:
            raise ParseError(
                f"{path}:{lineno}: timestamp {ts} is earlier than {last_ts}; "
                "replay files must be time-sorted"
            )
        last_ts = ts
        try:
            comments.append(
                Comment(
                    id=str(record["id"]),
                    text=str(record["text"]),
                    timestamp=ts,
                    source="replay",
                )
            )
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
    return comments


class ReplaySource:
    """Replays a capture with inter-arrival gaps divided by ``speed``.

    ``speed=math.inf`` yields as fast as the consumer pulls. The first
    comment is always yielded immediately.
    """

    def __init__(self, comments: Sequence[Comment], speed: float):
        if not speed > 0:
            raise ValueError(f"speed must be positive, got {speed}")
        self.comments = list(comments)
        self.speed = speed

    def __iter__(self) -> Iterator[Comment]:
        previous_ts: Optional[int] = None
        for comment in self.comments:
            if (
                previous_ts is not None
                and comment.timestamp is not None
                and math.isfinite(self.speed)
            ):
                gap_s = (comment.timestamp - previous_ts) / 1000.0 / self.speed
                if gap_s > 0:
                    time.sleep(gap_s)
            previous_ts = comment.timestamp
            yield comment


def replay_source(path: str, speed: float = math.inf) -> ReplaySource:
    """Load and validate a capture, ready to iterate at the given speed."""
    return ReplaySource(load_replay_file(path), speed)


class MockPollingSource:
    """Polling crawler stand-in: calls ``fetch(stream_id, cursor)`` forever.

    ``fetch`` returns the next batch of comments (empty batch = nothing
    new yet) or None for end-of-stream. ``interval`` seconds pass between
    empty polls. Real platform credentials/config would slot in here.
    """

    def __init__(
        self,
        fetch: Callable[[str, int], Optional[list[Comment]]],
        stream_id: str,
        interval: float = 1.0,
        max_polls: Optional[int] = None,
    ):
        if interval < 0:
            raise ValueError(f"interval must be non-negative, got {interval}")
        self.fetch = fetch
        self.stream_id = stream_id
        self.interval = interval
        self.max_polls = max_polls

    def __iter__(self) -> Iterator[Comment]:
        cursor = 0
        polls = 0
        last_ts: Optional[int] = None
        while self.max_polls is None or polls < self.max_polls:
            polls += 1
            batch = self.fetch(self.stream_id, cursor)
            if batch is None:
                return
            for comment in batch:
                if comment.timestamp is not None:
                    if last_ts is not None and comment.timestamp < last_ts:
                        raise ParseError(
                            f"poll source {self.stream_id!r} yielded a comment "
                            f"with decreasing timestamp {comment.timestamp}"
                        )
                    last_ts = comment.timestamp
                cursor += 1
                yield comment
            if not batch and self.interval:
                time.sleep(self.interval)
