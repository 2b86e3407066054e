"""The prediction record that flows from workers to sinks."""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..errors import ParseError
from ..labels import HatredLevel, TargetLevelTerm

__all__ = ["PredictionRecord"]


@dataclass(frozen=True)
class PredictionRecord:
    """One classified comment: terms, provenance, and timing."""

    comment_id: str
    terms: tuple[TargetLevelTerm, ...]
    model_id: str
    latency_ms: float
    processed_ts: int  # epoch milliseconds

    def __post_init__(self):
        if self.latency_ms < 0:
            raise ValueError(f"latency must be >= 0, got {self.latency_ms}")
        for term in self.terms:
            if term.level is HatredLevel.NORMAL:
                raise ValueError("prediction terms never carry the normal level")

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.comment_id,
                "terms": [str(t) for t in self.terms],
                "model": self.model_id,
                "latency_ms": self.latency_ms,
                "processed_ts": self.processed_ts,
            },
            ensure_ascii=False,
        )

    @staticmethod
    def from_json(line: str) -> "PredictionRecord":
        try:
            raw = json.loads(line)
            return PredictionRecord(
                comment_id=str(raw["id"]),
                terms=tuple(TargetLevelTerm.parse(t) for t in raw["terms"]),
                model_id=str(raw["model"]),
                latency_ms=float(raw["latency_ms"]),
                processed_ts=int(raw["processed_ts"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad prediction record: {exc}") from exc
