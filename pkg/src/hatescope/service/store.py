"""Durable round state as per-round append-only journals.

Every mutation appends one JSON line to the round's journal before the
in-memory state is considered updated; replaying a journal through the
same transition functions reconstructs an identical round after a
restart. A per-round lock serializes mutations, so concurrent HTTP
handlers cannot interleave a journal write with a state change.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Optional

from ..agreement import (
    AnnotationRecord,
    AnnotationRound,
    RoundStatus,
    gate_round,
)
from ..errors import ParseError, RoundStateError
from ..labels import Comment, LabelVector

__all__ = ["RoundStore"]


class RoundStore:
    """All live rounds plus their journals under ``data_dir/rounds``."""

    def __init__(self, data_dir: str):
        self.rounds_dir = Path(data_dir) / "rounds"
        self.rounds_dir.mkdir(parents=True, exist_ok=True)
        self._rounds: dict[str, AnnotationRound] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._replay_all()

    # -- public API ----------------------------------------------------------

    def list_rounds(self) -> list[str]:
        with self._registry_lock:
            return sorted(self._rounds)

    def get(self, round_id: str) -> Optional[AnnotationRound]:
        with self._registry_lock:
            return self._rounds.get(round_id)

    def create_round(
        self,
        round_id: str,
        comments: list[Comment],
        annotators: list[str],
        kappa_threshold: float,
        annotators_per_comment: int,
    ) -> AnnotationRound:
        round_ = AnnotationRound(
            round_id=round_id,
            comments=comments,
            annotators=annotators,
            kappa_threshold=kappa_threshold,
            annotators_per_comment=annotators_per_comment,
        )
        with self._registry_lock:
            if round_id in self._rounds:
                raise RoundStateError(f"round {round_id!r} already exists")
            self._locks[round_id] = threading.Lock()
            self._rounds[round_id] = round_
        self._append(
            round_id,
            {
                "event": "created",
                "round_id": round_id,
                "comments": [
                    {
                        "id": c.id,
                        "text": c.text,
                        "timestamp": c.timestamp,
                        "source": c.source,
                    }
                    for c in comments
                ],
                "annotators": annotators,
                "kappa_threshold": kappa_threshold,
                "annotators_per_comment": annotators_per_comment,
            },
        )
        return round_

    def submit(self, round_id: str, record: AnnotationRecord) -> bool:
        round_ = self._require(round_id)
        with self._locks[round_id]:
            replaced = round_.submit(record)
            self._append(
                round_id,
                {
                    "event": "record",
                    "annotator_id": record.annotator_id,
                    "comment_id": record.comment_id,
                    "codes": record.labels.to_codes(),
                    "submitted_at": record.submitted_at,
                },
            )
        return replaced

    def gate(self, round_id: str) -> AnnotationRound:
        round_ = self._require(round_id)
        with self._locks[round_id]:
            round_.request_gate()
            try:
                gate_round(round_)
            except Exception:
                round_.status = RoundStatus.OPEN  # gate never ran; stay Open
                raise
            self._append(
                round_id,
                {
                    "event": "gate",
                    "status": round_.status.value,
                    "overall_kappa": round_.overall_kappa,
                },
            )
        return round_

    # -- internals -----------------------------------------------------------

    def _require(self, round_id: str) -> AnnotationRound:
        round_ = self.get(round_id)
        if round_ is None:
            raise KeyError(round_id)
        return round_

    def _journal_path(self, round_id: str) -> Path:
        safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in round_id)
        return self.rounds_dir / f"{safe}.jsonl"

    def _append(self, round_id: str, event: dict) -> None:
        with self._journal_path(round_id).open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")
            fh.flush()

    def _replay_all(self) -> None:
        for path in sorted(self.rounds_dir.glob("*.jsonl")):
            self._replay_one(path)

    def _replay_one(self, path: Path) -> None:
        round_: Optional[AnnotationRound] = None
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    event = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"{path}:{lineno}: corrupt journal: {exc.msg}")
                kind = event.get("event")
                if kind == "created":
                    round_ = AnnotationRound(
                        round_id=event["round_id"],
                        comments=[
                            Comment(
                                id=c["id"],
                                text=c["text"],
                                timestamp=c.get("timestamp"),
                                source=c.get("source", ""),
                            )
                            for c in event["comments"]
                        ],
                        annotators=list(event["annotators"]),
                        kappa_threshold=event["kappa_threshold"],
                        annotators_per_comment=event["annotators_per_comment"],
                    )
                elif kind == "record":
                    if round_ is None:
                        raise ParseError(f"{path}:{lineno}: record before created")
                    round_.submit(
                        AnnotationRecord(
                            annotator_id=event["annotator_id"],
                            comment_id=event["comment_id"],
                            labels=LabelVector.from_codes(event["codes"]),
                            submitted_at=event.get("submitted_at", 0),
                        )
                    )
                elif kind == "gate":
                    if round_ is None:
                        raise ParseError(f"{path}:{lineno}: gate before created")
                    round_.request_gate()
                    gate_round(round_)
                    if round_.status.value != event["status"]:
                        raise ParseError(
                            f"{path}:{lineno}: journal says {event['status']} "
                            f"but replay produced {round_.status.value}"
                        )
                else:
                    raise ParseError(f"{path}:{lineno}: unknown event {kind!r}")
        if round_ is not None:
            with self._registry_lock:
                self._rounds[round_.round_id] = round_
                self._locks[round_.round_id] = threading.Lock()
