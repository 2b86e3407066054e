"""In-process partitioned log with consumer groups.

Topics are ordered append-only logs split into partitions. A message's
partition is a stable hash of its key, so one key always lands in one
partition and per-key order is total. Consumer groups track a committed
offset per partition; polling returns everything after the commit, which
makes delivery at-least-once: a consumer that dies before committing
sees the same messages again. Offsets are gapless and start at 0.

The same contract can front an external log-based broker; this module
supplies the in-process implementation plus the seam (:class:`LogBus`).
"""

from __future__ import annotations

import hashlib
import threading
import time
from dataclasses import dataclass
from typing import Any, Optional, Protocol

from ..errors import (
    InvalidCommit,
    TopicExists,
    UnknownGroup,
    UnknownTopic,
)

__all__ = [
    "StreamMessage",
    "TopicHandle",
    "LogBus",
    "MessageBus",
    "partition_for",
    "now_ms",
]

# Epoch-anchored monotonic clock: wall time can step backwards, which
# would break latency and watermark arithmetic mid-run.
_EPOCH_ANCHOR = time.time() - time.monotonic()


def now_ms() -> int:
    return int((_EPOCH_ANCHOR + time.monotonic()) * 1000)


def partition_for(key: str, n_partitions: int) -> int:
    """Stable partition assignment: same key, same partition, any process."""
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % n_partitions


@dataclass(frozen=True)
class StreamMessage:
    topic: str
    partition: int
    offset: int
    key: str
    payload: Any
    ingest_ts: int  # epoch milliseconds


@dataclass(frozen=True)
class TopicHandle:
    name: str
    partitions: int


class LogBus(Protocol):
    """Contract an external broker adapter must satisfy."""

    def create_topic(self, name: str, partitions: int) -> TopicHandle: ...

    def publish(
        self, topic: str, key: str, payload: Any, ingest_ts: Optional[int] = None
    ) -> tuple[int, int]: ...

    def subscribe(self, group: str, topic: str) -> None: ...

    def poll(
        self,
        group: str,
        topic: str,
        max_messages: int = 100,
        partitions: Optional[list[int]] = None,
    ) -> list[StreamMessage]: ...

    def commit(self, group: str, topic: str, partition: int, offset: int) -> None: ...


class _GroupState:
    def __init__(self, n_partitions: int):
        self.committed = [-1] * n_partitions
        self.delivered = [-1] * n_partitions  # high-water mark per partition


class _Topic:
    def __init__(self, name: str, n_partitions: int):
        self.name = name
        self.partitions: list[list[StreamMessage]] = [[] for _ in range(n_partitions)]
        self.groups: dict[str, _GroupState] = {}


class MessageBus:
    """Thread-safe in-process log bus."""

    def __init__(self):
        self._topics: dict[str, _Topic] = {}
        self._lock = threading.RLock()

    def create_topic(self, name: str, partitions: int) -> TopicHandle:
        if partitions < 1:
            raise ValueError(f"partitions must be >= 1, got {partitions}")
        with self._lock:
            if name in self._topics:
                raise TopicExists(f"topic {name!r} already exists")
            self._topics[name] = _Topic(name, partitions)
        return TopicHandle(name=name, partitions=partitions)

    def _topic(self, name: str) -> _Topic:
        try:
            return self._topics[name]
        except KeyError:
            raise UnknownTopic(f"no topic named {name!r}") from None

    def publish(
        self,
        topic: str,
        key: str,
        payload: Any,
        ingest_ts: Optional[int] = None,
    ) -> tuple[int, int]:
        with self._lock:
            t = self._topic(topic)
            partition = partition_for(key, len(t.partitions))
            log = t.partitions[partition]
            offset = len(log)
            log.append(
                StreamMessage(
                    topic=topic,
                    partition=partition,
                    offset=offset,
                    key=key,
                    payload=payload,
                    ingest_ts=now_ms() if ingest_ts is None else ingest_ts,
                )
            )
            return partition, offset

    def subscribe(self, group: str, topic: str) -> None:
        with self._lock:
            t = self._topic(topic)
            if group not in t.groups:
                t.groups[group] = _GroupState(len(t.partitions))

    def _group(self, topic: _Topic, group: str) -> _GroupState:
        try:
            return topic.groups[group]
        except KeyError:
            raise UnknownGroup(
                f"group {group!r} is not subscribed to topic {topic.name!r}"
            ) from None

    def poll(
        self,
        group: str,
        topic: str,
        max_messages: int = 100,
        partitions: Optional[list[int]] = None,
    ) -> list[StreamMessage]:
        """Up to max_messages past the group's commits, per-partition order.

        Uncommitted messages are redelivered on every poll; commit to
        advance. Pass ``partitions`` to restrict to an assigned subset.
        """
        with self._lock:
            t = self._topic(topic)
            state = self._group(t, group)
            chosen = range(len(t.partitions)) if partitions is None else partitions
            out: list[StreamMessage] = []
            for p in chosen:
                start = state.committed[p] + 1
                for msg in t.partitions[p][start:]:
                    if len(out) >= max_messages:
                        break
                    out.append(msg)
                    if msg.offset > state.delivered[p]:
                        state.delivered[p] = msg.offset
                if len(out) >= max_messages:
                    break
            return out

    def commit(self, group: str, topic: str, partition: int, offset: int) -> None:
        with self._lock:
            t = self._topic(topic)
            state = self._group(t, group)
            if partition < 0 or partition >= len(t.partitions):
                raise InvalidCommit(
                    f"topic {topic!r} has no partition {partition}"
                )
            if offset < 0 or offset > state.delivered[partition]:
                raise InvalidCommit(
                    f"offset {offset} was never delivered to group {group!r} "
                    f"on {topic!r}[{partition}]"
                )
            if offset > state.committed[partition]:
                state.committed[partition] = offset

    # -- inspection helpers (tests, reports) --------------------------------

    def partition_count(self, topic: str) -> int:
        with self._lock:
            return len(self._topic(topic).partitions)

    def end_offsets(self, topic: str) -> list[int]:
        """Next offset to be assigned, per partition."""
        with self._lock:
            return [len(p) for p in self._topic(topic).partitions]

    def committed_offsets(self, group: str, topic: str) -> list[int]:
        with self._lock:
            t = self._topic(topic)
            return list(self._group(t, group).committed)

    def messages(self, topic: str, partition: int) -> list[StreamMessage]:
        with self._lock:
            return list(self._topic(topic).partitions[partition])
