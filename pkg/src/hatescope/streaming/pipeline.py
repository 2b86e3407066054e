"""Source-to-sink classification pipeline over the log bus.

Topology: a producer publishes comments to a partitioned topic; a pool
of worker threads with partition-exclusive assignment polls, classifies,
publishes prediction records to a second topic, and commits; a single
sink consumer writes records keyed by comment id and commits only after
the write sticks. Delivery is at-least-once end to end, and the sink is
idempotent, so the run's net effect is exactly-once: every source
comment appears in the sink exactly once no matter how many workers
crash or writes fail mid-flight.

Fault injection is first-class: worker fault hooks may kill a worker at
either side of the publish, and sinks may be wrapped to fail before or
after the durable write. A supervisor respawns dead workers with their
partition assignment intact.
"""

from __future__ import annotations

import json
import random
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Protocol, Union

from ..classifier.model import MultiHeadLinearModel, PredictionOutput, predict_labels
from ..classifier.remote import remote_predict
from ..errors import SinkError
from ..labels import Comment, label_vector_to_terms
from .bus import MessageBus, StreamMessage, now_ms
from .records import PredictionRecord
from .reports import LatencyReport, WindowAggregate, latency_report, window_aggregate

__all__ = [
    "COMMENTS_TOPIC",
    "PREDICTIONS_TOPIC",
    "DEAD_LETTER_TOPIC",
    "DeadLetter",
    "DocumentSink",
    "MemoryDocumentSink",
    "FileSink",
    "FlakySink",
    "WorkerKilled",
    "crash_injector",
    "RunReport",
    "run_pipeline",
]

COMMENTS_TOPIC = "comments"
PREDICTIONS_TOPIC = "predictions"
DEAD_LETTER_TOPIC = "deadletter"

_WORKER_GROUP = "workers"
_SINK_GROUP = "sink"
_DLQ_GROUP = "dlq"


class WorkerKilled(Exception):
    """Raised by fault hooks to take a worker down mid-message."""


@dataclass(frozen=True)
class DeadLetter:
    """A comment the classifier could not handle, and why."""

    comment_id: str
    error: str
    model_id: str
    failed_ts: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.comment_id,
                "terms": [],
                "model": self.model_id,
                "latency_ms": 0.0,
                "processed_ts": self.failed_ts,
                "error": self.error,
            },
            ensure_ascii=False,
        )


class DocumentSink(Protocol):
    """Idempotent keyed store; put returns True only on first write."""

    def put(self, comment_id: str, record: PredictionRecord) -> bool: ...

    def records(self) -> list[PredictionRecord]: ...


class MemoryDocumentSink:
    """Dict-backed sink preserving first-write order."""

    def __init__(self):
        self._records: dict[str, PredictionRecord] = {}

    def put(self, comment_id: str, record: PredictionRecord) -> bool:
        if comment_id in self._records:
            return False
        self._records[comment_id] = record
        return True

    def records(self) -> list[PredictionRecord]:
        return list(self._records.values())

    def __contains__(self, comment_id: str) -> bool:
        return comment_id in self._records

    def __len__(self) -> int:
        return len(self._records)


class FileSink:
    """Append-only newline-delimited JSON file, one record per id.

    The line is flushed to the OS before put returns, so a commit that
    follows a successful put never precedes the bytes.
    """

    def __init__(self, path: str):
        self.path = path
        self._seen: dict[str, PredictionRecord] = {}
        self._fh = open(path, "w", encoding="utf-8")

    def put(self, comment_id: str, record: PredictionRecord) -> bool:
        if comment_id in self._seen:
            return False
        self._fh.write(record.to_json() + "\n")
        self._fh.flush()
        self._seen[comment_id] = record
        return True

    def records(self) -> list[PredictionRecord]:
        return list(self._seen.values())

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "FileSink":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class FlakySink:
    """Wraps a sink with seeded random failures on either side of the write.

    fail_before leaves no trace (clean retry); fail_after means the write
    landed but the caller sees an error, exercising the idempotent-skip
    path on redelivery.
    """

    def __init__(
        self,
        inner: DocumentSink,
        seed: int,
        fail_before: float = 0.0,
        fail_after: float = 0.0,
    ):
        self.inner = inner
        self._rng = random.Random(seed)
        self._lock = threading.Lock()
        self.fail_before = fail_before
        self.fail_after = fail_after
        self.failures = 0

    def put(self, comment_id: str, record: PredictionRecord) -> bool:
        with self._lock:
            before = self._rng.random() < self.fail_before
            after = self._rng.random() < self.fail_after
        if before:
            self.failures += 1
            raise SinkError(f"injected failure before writing {comment_id}")
        written = self.inner.put(comment_id, record)
        if after:
            self.failures += 1
            raise SinkError(f"injected failure after writing {comment_id}")
        return written

    def records(self) -> list[PredictionRecord]:
        return self.inner.records()


FaultHook = Callable[[str, StreamMessage], None]


def crash_injector(
    probability: float, seed: int, max_crashes: int = 10
) -> FaultHook:
    """Fault hook killing the worker with the given per-call probability."""
    rng = random.Random(seed)
    lock = threading.Lock()
    budget = [max_crashes]

    def hook(stage: str, msg: StreamMessage) -> None:
        with lock:
            if budget[0] <= 0:
                return
            if rng.random() < probability:
                budget[0] -= 1
                raise WorkerKilled(f"injected crash at {stage} for key {msg.key}")

    return hook


Predictor = Union[
    MultiHeadLinearModel, str, Callable[[Comment], PredictionOutput]
]


def _as_predictor(classifier: Predictor) -> Callable[[Comment], PredictionOutput]:
    if isinstance(classifier, MultiHeadLinearModel):
        return lambda comment: predict_labels(classifier, comment)
    if isinstance(classifier, str):
        endpoint = classifier
        return lambda comment: remote_predict(endpoint, comment)
    if callable(classifier):
        return classifier
    raise TypeError(f"cannot use {type(classifier).__name__} as a classifier")


@dataclass
class RunReport:
    """Everything a finished run can be audited with."""

    n_source: int
    n_sunk: int
    n_duplicates_skipped: int
    n_dead_letters: int
    worker_restarts: int
    sink_failures: int
    latency: Optional[LatencyReport]
    windows: list[WindowAggregate]
    late_records: list[PredictionRecord]
    dead_letters: list[DeadLetter]
    elapsed_s: float
    sink_records: list[PredictionRecord] = field(default_factory=list)
    bus: Optional[MessageBus] = None


def run_pipeline(
    source: Iterable[Comment],
    classifier: Predictor,
    sink: DocumentSink,
    partitions: int = 4,
    workers: int = 2,
    poll_batch: int = 50,
    window_s: int = 60,
    worker_fault: Optional[FaultHook] = None,
    dead_letter_path: Optional[str] = None,
    max_wait_s: float = 90.0,
    bus: Optional[MessageBus] = None,
) -> RunReport:
    """Drive every source comment through classification into the sink.

    Returns once the source is exhausted and every message has been
    committed end to end. Raises RuntimeError if progress stalls past
    ``max_wait_s`` (a bug, not an operational condition: all faults the
    pipeline is designed around are recoverable).
    """
    if partitions < 1:
        raise ValueError(f"partitions must be >= 1, got {partitions}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    started = time.monotonic()
    predictor = _as_predictor(classifier)
    bus = bus if bus is not None else MessageBus()
    bus.create_topic(COMMENTS_TOPIC, partitions)
    bus.create_topic(PREDICTIONS_TOPIC, partitions)
    bus.create_topic(DEAD_LETTER_TOPIC, 1)
    bus.subscribe(_WORKER_GROUP, COMMENTS_TOPIC)
    bus.subscribe(_SINK_GROUP, PREDICTIONS_TOPIC)
    bus.subscribe(_DLQ_GROUP, DEAD_LETTER_TOPIC)

    producer_done = threading.Event()
    stop = threading.Event()
    counters = {"source": 0, "duplicates": 0, "sink_failures": 0, "restarts": 0}
    counters_lock = threading.Lock()

    def produce() -> None:
        for comment in source:
            if stop.is_set():
                return
            bus.publish(COMMENTS_TOPIC, key=comment.id, payload=comment)
            with counters_lock:
                counters["source"] += 1
        producer_done.set()

    def comments_drained(assigned: list[int]) -> bool:
        if not producer_done.is_set():
            return False
        committed = bus.committed_offsets(_WORKER_GROUP, COMMENTS_TOPIC)
        ends = bus.end_offsets(COMMENTS_TOPIC)
        return all(committed[p] == ends[p] - 1 for p in assigned)

    def work(assigned: list[int]) -> None:
        try:
            _work_loop(assigned)
        except WorkerKilled:
            return  # uncommitted messages will be redelivered to a respawn

    def _work_loop(assigned: list[int]) -> None:
        model_tag = getattr(classifier, "model_id", None)
        while not stop.is_set():
            messages = bus.poll(
                _WORKER_GROUP, COMMENTS_TOPIC, poll_batch, partitions=assigned
            )
            if not messages:
                if comments_drained(assigned):
                    return
                time.sleep(0.001)
                continue
            for msg in messages:
                if worker_fault is not None:
                    worker_fault("deliver", msg)
                comment: Comment = msg.payload
                try:
                    output = predictor(comment)
                    processed = now_ms()
                    record = PredictionRecord(
                        comment_id=comment.id,
                        terms=tuple(label_vector_to_terms(output.labels)),
                        model_id=output.model_id,
                        latency_ms=float(max(0, processed - msg.ingest_ts)),
                        processed_ts=processed,
                    )
                except WorkerKilled:
                    raise
                except Exception as exc:
                    bus.publish(
                        DEAD_LETTER_TOPIC,
                        key=comment.id,
                        payload=DeadLetter(
                            comment_id=comment.id,
                            error=f"{type(exc).__name__}: {exc}",
                            model_id=str(model_tag or "unknown"),
                            failed_ts=now_ms(),
                        ),
                    )
                else:
                    bus.publish(PREDICTIONS_TOPIC, key=comment.id, payload=record)
                    if worker_fault is not None:
                        worker_fault("commit", msg)
                bus.commit(_WORKER_GROUP, COMMENTS_TOPIC, msg.partition, msg.offset)

    def predictions_drained() -> bool:
        committed = bus.committed_offsets(_SINK_GROUP, PREDICTIONS_TOPIC)
        ends = bus.end_offsets(PREDICTIONS_TOPIC)
        return all(c == e - 1 for c, e in zip(committed, ends))

    all_partitions = list(range(partitions))

    def drain_sink() -> None:
        while not stop.is_set():
            messages = bus.poll(_SINK_GROUP, PREDICTIONS_TOPIC, poll_batch)
            if not messages:
                if comments_drained(all_partitions) and predictions_drained():
                    return
                time.sleep(0.001)
                continue
            for msg in messages:
                record: PredictionRecord = msg.payload
                try:
                    fresh = sink.put(record.comment_id, record)
                except SinkError:
                    with counters_lock:
                        counters["sink_failures"] += 1
                    break  # repoll; redelivery resumes from the failure
                if not fresh:
                    with counters_lock:
                        counters["duplicates"] += 1
                bus.commit(_SINK_GROUP, PREDICTIONS_TOPIC, msg.partition, msg.offset)

    assignments = [
        [p for p in range(partitions) if p % workers == w] for w in range(workers)
    ]
    assignments = [a for a in assignments if a]

    producer = threading.Thread(target=produce, name="producer", daemon=True)
    producer.start()
    worker_threads: list[tuple[threading.Thread, list[int]]] = []
    for i, assigned in enumerate(assignments):
        t = threading.Thread(
            target=work, args=(assigned,), name=f"worker-{i}", daemon=True
        )
        t.start()
        worker_threads.append((t, assigned))
    sink_thread = threading.Thread(target=drain_sink, name="sink", daemon=True)
    sink_thread.start()

    try:
        while True:
            done = (
                producer_done.is_set()
                and comments_drained(all_partitions)
                and predictions_drained()
            )
            if done:
                break
            if time.monotonic() - started > max_wait_s:
                stop.set()
                raise RuntimeError(
                    f"pipeline made no full pass within {max_wait_s}s; "
                    f"committed={bus.committed_offsets(_WORKER_GROUP, COMMENTS_TOPIC)}"
                )
            # Respawn any worker that a fault hook took down.
            for i, (t, assigned) in enumerate(worker_threads):
                if not t.is_alive() and not comments_drained(assigned):
                    with counters_lock:
                        counters["restarts"] += 1
                    fresh = threading.Thread(
                        target=work, args=(assigned,), name=t.name, daemon=True
                    )
                    fresh.start()
                    worker_threads[i] = (fresh, assigned)
            time.sleep(0.005)
    finally:
        if not stop.is_set():
            # Let drained threads notice completion and return.
            for t, _ in worker_threads:
                t.join(timeout=5.0)
            sink_thread.join(timeout=5.0)
            producer.join(timeout=5.0)

    dead_letters: list[DeadLetter] = []
    seen_dead: set[str] = set()
    while True:
        messages = bus.poll(_DLQ_GROUP, DEAD_LETTER_TOPIC, poll_batch)
        if not messages:
            break
        for msg in messages:
            letter: DeadLetter = msg.payload
            if letter.comment_id not in seen_dead:
                seen_dead.add(letter.comment_id)
                dead_letters.append(letter)
            bus.commit(_DLQ_GROUP, DEAD_LETTER_TOPIC, msg.partition, msg.offset)
    if dead_letter_path is not None and dead_letters:
        with open(dead_letter_path, "w", encoding="utf-8") as fh:
            for letter in dead_letters:
                fh.write(letter.to_json() + "\n")

    sink_records = sink.records()
    windows, late = window_aggregate(sink_records, width_s=window_s)
    report = RunReport(
        n_source=counters["source"],
        n_sunk=len(sink_records),
        n_duplicates_skipped=counters["duplicates"],
        n_dead_letters=len(dead_letters),
        worker_restarts=counters["restarts"],
        sink_failures=counters["sink_failures"],
        latency=latency_report(sink_records) if sink_records else None,
        windows=windows,
        late_records=late,
        dead_letters=dead_letters,
        elapsed_s=time.monotonic() - started,
        sink_records=sink_records,
        bus=bus,
    )
    return report
