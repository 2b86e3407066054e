"""Service and CLI configuration."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import IoError, ParseError

__all__ = ["ServiceConfig"]


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8787
    data_dir: str = "./hatescope-data"
    model_path: Optional[str] = None
    annotators_per_comment: int = 3
    kappa_threshold: float = 0.4
    partitions: int = 4
    workers: int = 2

    def __post_init__(self):
        if not 0.0 < self.kappa_threshold < 1.0:
            raise ValueError(
                f"kappa threshold must be in (0, 1), got {self.kappa_threshold}"
            )
        if self.partitions < 1:
            raise ValueError(f"partitions must be >= 1, got {self.partitions}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.annotators_per_comment < 1:
            raise ValueError(
                f"annotators per comment must be >= 1, "
                f"got {self.annotators_per_comment}"
            )

    @staticmethod
    def from_file(path: str, **overrides) -> "ServiceConfig":
        """Load from a JSON file; keyword overrides win over file values."""
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise IoError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"config {path} is not valid JSON: {exc.msg}") from exc
        if not isinstance(raw, dict):
            raise ParseError(f"config {path} must hold a JSON object")
        known = set(ServiceConfig.__dataclass_fields__)
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ParseError(f"config {path}: unknown keys {unknown}")
        merged = {**raw, **{k: v for k, v in overrides.items() if v is not None}}
        return ServiceConfig(**merged)

    def to_file(self, path: str) -> None:
        Path(path).write_text(
            json.dumps(asdict(self), indent=2) + "\n", encoding="utf-8"
        )
