"""Set-based evaluation and corpus statistics.

Predictions and references are multi-label sets per comment. Two task
views exist: target-only (which targets are mentioned at all) and
target-level (exact target#level tuples). Both report micro scores,
pooling intersection sizes over the corpus, and macro scores averaged
over per-target micro scores.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import AlignmentError, EmptyInput
from .labels import (
    TARGETS,
    HatredLevel,
    LabeledComment,
    LabelVector,
    Target,
)
from .preprocess import tokenize

__all__ = [
    "PRF",
    "EvalReport",
    "target_only_prf",
    "target_level_prf",
    "evaluate",
    "per_target_confusion",
    "dataset_stats",
    "DatasetStats",
    "format_eval_text",
    "eval_to_json",
]


@dataclass(frozen=True)
class PRF:
    """Precision, recall, F1 with the raw pooled counts behind them."""

    precision: float
    recall: float
    f1: float
    n_predicted: int
    n_reference: int
    n_correct: int

    @staticmethod
    def from_counts(n_correct: int, n_predicted: int, n_reference: int) -> "PRF":
        p = n_correct / n_predicted if n_predicted else 0.0
        r = n_correct / n_reference if n_reference else 0.0
        f = 2 * p * r / (p + r) if (p + r) > 0 else 0.0
        return PRF(p, r, f, n_predicted, n_reference, n_correct)


@dataclass(frozen=True)
class EvalReport:
    """Micro and macro scores for one task view."""

    task: str  # "target" or "target-level"
    micro: PRF
    macro_precision: float
    macro_recall: float
    macro_f1: float
    per_target: dict[Target, PRF]
    n_comments: int


def _join(
    predictions: Mapping[str, LabelVector],
    references: Mapping[str, LabelVector],
) -> list[str]:
    """Align the two maps by comment id, failing loudly on any mismatch."""
    pred_ids = set(predictions)
    ref_ids = set(references)
    if pred_ids != ref_ids:
        only_pred = sorted(pred_ids - ref_ids)[:5]
        only_ref = sorted(ref_ids - pred_ids)[:5]
        raise AlignmentError(
            "prediction and reference ids differ; "
            f"only-predicted={only_pred} only-reference={only_ref}"
        )
    if not pred_ids:
        raise EmptyInput("nothing to evaluate")
    return sorted(pred_ids)


def _mention_sets(vector: LabelVector) -> set[Target]:
    return {
        t for t in TARGETS if vector.level_for(t) is not HatredLevel.NORMAL
    }


def _tuple_sets(vector: LabelVector) -> set[tuple[Target, HatredLevel]]:
    return {
        (t, vector.level_for(t))
        for t in TARGETS
        if vector.level_for(t) is not HatredLevel.NORMAL
    }


def target_only_prf(
    predictions: Mapping[str, LabelVector],
    references: Mapping[str, LabelVector],
) -> EvalReport:
    """Scores for the which-targets-are-mentioned view."""
    ids = _join(predictions, references)
    per_target_counts = {t: [0, 0, 0] for t in TARGETS}  # correct, pred, ref
    for cid in ids:
        pred = _mention_sets(predictions[cid])
        ref = _mention_sets(references[cid])
        for t in pred & ref:
            per_target_counts[t][0] += 1
        for t in pred:
            per_target_counts[t][1] += 1
        for t in ref:
            per_target_counts[t][2] += 1
    return _build_report("target", per_target_counts, len(ids))


def target_level_prf(
    predictions: Mapping[str, LabelVector],
    references: Mapping[str, LabelVector],
) -> EvalReport:
    """Scores for the exact target#level view."""
    ids = _join(predictions, references)
    per_target_counts = {t: [0, 0, 0] for t in TARGETS}
    for cid in ids:
        pred = _tuple_sets(predictions[cid])
        ref = _tuple_sets(references[cid])
        for t, _ in pred & ref:
            per_target_counts[t][0] += 1
        for t, _ in pred:
            per_target_counts[t][1] += 1
        for t, _ in ref:
            per_target_counts[t][2] += 1
    return _build_report("target-level", per_target_counts, len(ids))


def _build_report(
    task: str, counts: dict[Target, list[int]], n_comments: int
) -> EvalReport:
    per_target = {
        t: PRF.from_counts(c[0], c[1], c[2]) for t, c in counts.items()
    }
    total_correct = sum(c[0] for c in counts.values())
    total_pred = sum(c[1] for c in counts.values())
    total_ref = sum(c[2] for c in counts.values())
    micro = PRF.from_counts(total_correct, total_pred, total_ref)
    macro_p = sum(p.precision for p in per_target.values()) / len(TARGETS)
    macro_r = sum(p.recall for p in per_target.values()) / len(TARGETS)
    macro_f = sum(p.f1 for p in per_target.values()) / len(TARGETS)
    return EvalReport(
        task=task,
        micro=micro,
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=macro_f,
        per_target=per_target,
        n_comments=n_comments,
    )


def evaluate(
    predictions: Mapping[str, LabelVector],
    references: Mapping[str, LabelVector],
) -> dict[str, EvalReport]:
    """Both task views at once, keyed by task name."""
    return {
        "target": target_only_prf(predictions, references),
        "target-level": target_level_prf(predictions, references),
    }


def per_target_confusion(
    predictions: Mapping[str, LabelVector],
    references: Mapping[str, LabelVector],
) -> dict[Target, list[list[int]]]:
    """4x4 level confusion per target, rows=reference, cols=predicted."""
    ids = _join(predictions, references)
    out = {t: [[0] * 4 for _ in range(4)] for t in TARGETS}
    for cid in ids:
        for t in TARGETS:
            ref = int(references[cid].level_for(t))
            pred = int(predictions[cid].level_for(t))
            out[t][ref][pred] += 1
    return out


# -- corpus statistics -------------------------------------------------------


@dataclass(frozen=True)
class DatasetStats:
    n_comments: int
    vocabulary_size: int
    total_tokens: int
    avg_length: float
    min_length: int
    q1_length: int
    median_length: int
    q3_length: int
    max_length: int
    # 0..5 distinct non-normal targets in a comment -> comment count.
    target_count_hist: dict[int, int]
    per_target: dict[Target, int]
    per_target_level: dict[Target, dict[HatredLevel, int]]


def _nearest_rank(sorted_values: Sequence[int], q: float) -> int:
    """Nearest-rank quantile: value at ceil(q*n), 1-indexed."""
    rank = max(1, math.ceil(q * len(sorted_values)))
    return sorted_values[rank - 1]


def dataset_stats(comments: Sequence[LabeledComment]) -> DatasetStats:
    """Token-level and label-distribution statistics for a split."""
    if not comments:
        raise EmptyInput("no comments to summarize")
    lengths = sorted(len(tokenize(c.comment.text)) for c in comments)
    vocab = set()
    for c in comments:
        vocab.update(tokenize(c.comment.text))
    hist: dict[int, int] = {k: 0 for k in range(len(TARGETS) + 1)}
    per_target: dict[Target, int] = {t: 0 for t in TARGETS}
    per_level: dict[Target, dict[HatredLevel, int]] = {
        t: {lv: 0 for lv in HatredLevel} for t in TARGETS
    }
    for c in comments:
        mentioned = 0
        for t in TARGETS:
            lv = c.labels.level_for(t)
            per_level[t][lv] += 1
            if lv is not HatredLevel.NORMAL:
                mentioned += 1
                per_target[t] += 1
        hist[mentioned] += 1
    total_tokens = sum(lengths)
    return DatasetStats(
        n_comments=len(comments),
        vocabulary_size=len(vocab),
        total_tokens=total_tokens,
        avg_length=total_tokens / len(comments),
        min_length=lengths[0],
        q1_length=_nearest_rank(lengths, 0.25),
        median_length=_nearest_rank(lengths, 0.5),
        q3_length=_nearest_rank(lengths, 0.75),
        max_length=lengths[-1],
        target_count_hist=hist,
        per_target=per_target,
        per_target_level=per_level,
    )


# -- report rendering --------------------------------------------------------


def format_eval_text(reports: Mapping[str, EvalReport]) -> str:
    """Fixed-width table over both task views."""
    lines = []
    for task in ("target", "target-level"):
        if task not in reports:
            continue
        r = reports[task]
        lines.append(f"task: {task}  (n={r.n_comments})")
        lines.append(
            f"{'target':<18}{'precision':>11}{'recall':>9}{'f1':>9}"
            f"{'pred':>7}{'ref':>6}"
        )
        for t in TARGETS:
            p = r.per_target[t]
            lines.append(
                f"{t.slug:<18}{p.precision:>11.4f}{p.recall:>9.4f}"
                f"{p.f1:>9.4f}{p.n_predicted:>7}{p.n_reference:>6}"
            )
        lines.append(
            f"{'micro':<18}{r.micro.precision:>11.4f}{r.micro.recall:>9.4f}"
            f"{r.micro.f1:>9.4f}{r.micro.n_predicted:>7}{r.micro.n_reference:>6}"
        )
        lines.append(
            f"{'macro':<18}{r.macro_precision:>11.4f}{r.macro_recall:>9.4f}"
            f"{r.macro_f1:>9.4f}"
        )
        lines.append("")
    return "\n".join(lines)


def eval_to_json(reports: Mapping[str, EvalReport]) -> str:
    """Machine-readable dump of both task views."""
    payload = {}
    for task, r in reports.items():
        payload[task] = {
            "n_comments": r.n_comments,
            "micro": {
                "precision": r.micro.precision,
                "recall": r.micro.recall,
                "f1": r.micro.f1,
                "predicted": r.micro.n_predicted,
                "reference": r.micro.n_reference,
                "correct": r.micro.n_correct,
            },
            "macro": {
                "precision": r.macro_precision,
                "recall": r.macro_recall,
                "f1": r.macro_f1,
            },
            "per_target": {
                t.slug: {
                    "precision": p.precision,
                    "recall": p.recall,
                    "f1": p.f1,
                    "predicted": p.n_predicted,
                    "reference": p.n_reference,
                    "correct": p.n_correct,
                }
                for t, p in r.per_target.items()
            },
        }
    return json.dumps(payload, indent=2, sort_keys=True)
