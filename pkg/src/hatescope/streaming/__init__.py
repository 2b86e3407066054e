"""Partitioned log bus, sources, classification pipeline, and reports."""

from .bus import LogBus, MessageBus, StreamMessage, TopicHandle, now_ms, partition_for
from .pipeline import (
    COMMENTS_TOPIC,
    DEAD_LETTER_TOPIC,
    PREDICTIONS_TOPIC,
    DeadLetter,
    DocumentSink,
    FileSink,
    FlakySink,
    MemoryDocumentSink,
    RunReport,
    WorkerKilled,
    crash_injector,
    run_pipeline,
)
from .records import PredictionRecord
from .reports import (
    LatencyReport,
    LatencyStats,
    WindowAggregate,
    aggregates_to_csv,
    latency_report,
    window_aggregate,
)
from .sources import MockPollingSource, ReplaySource, load_replay_file, replay_source

__all__ = [
    "LogBus",
    "MessageBus",
    "StreamMessage",
    "TopicHandle",
    "now_ms",
    "partition_for",
    "COMMENTS_TOPIC",
    "PREDICTIONS_TOPIC",
    "DEAD_LETTER_TOPIC",
    "DeadLetter",
    "DocumentSink",
    "FileSink",
    "FlakySink",
    "MemoryDocumentSink",
    "RunReport",
    "WorkerKilled",
    "crash_injector",
    "run_pipeline",
    "PredictionRecord",
    "LatencyReport",
    "LatencyStats",
    "WindowAggregate",
    "aggregates_to_csv",
    "latency_report",
    "window_aggregate",
    "MockPollingSource",
    "ReplaySource",
    "load_replay_file",
    "replay_source",
]
