"""Inter-annotator agreement, majority voting, and the gated round lifecycle.

Rounds collect one label vector per (annotator, comment). Agreement across
annotator pairs is measured per target with Cohen's kappa; the average
over targets gates the round: strictly above the threshold the round
passes and final labels are produced by majority vote, otherwise the
round is sent back for guideline revision.

Kappa is computed in exact integer arithmetic internally and returned as
a float, which keeps the "expected agreement is one" degenerate case an
exact structural check instead of a floating-point comparison. Degenerate
pairs are reported as undefined (``None``) and excluded from averages.
"""

from __future__ import annotations

import csv
import itertools
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .errors import (
    EmptyInput,
    GateIndeterminate,
    InvalidLevel,
    IoError,
    LengthMismatch,
    RaggedCounts,
    RoundStateError,
    SchemaError,
)
from .labels import TARGETS, Comment, HatredLevel, LabelVector, Target

__all__ = [
    "AnnotationRecord",
    "AnnotationRound",
    "RoundStatus",
    "AgreementReport",
    "PairAgreement",
    "VoteResult",
    "TargetVote",
    "cohen_kappa",
    "fleiss_kappa",
    "agreement_report",
    "report_from_records",
    "majority_vote",
    "gate_round",
    "reopen_round",
    "load_records_csv",
    "agreement_report_to_csv",
]

DEFAULT_KAPPA_THRESHOLD = 0.4
DEFAULT_ANNOTATORS_PER_COMMENT = 3


def cohen_kappa(a: Sequence[int], b: Sequence[int]) -> Optional[float]:
    """Cohen's kappa between two aligned category-code sequences.

    Returns ``None`` (undefined) when chance agreement equals one, i.e.
    both raters used a single identical category throughout.
    """
    if len(a) != len(b):
        raise LengthMismatch(f"sequences differ in length: {len(a)} vs {len(b)}")
    n = len(a)
    if n == 0:
        raise EmptyInput("kappa needs at least one rating pair")
    counts_a = Counter(a)
    counts_b = Counter(b)
    agree = sum(1 for x, y in zip(a, b) if x == y)
    # Scale (p_o - p_e)/(1 - p_e) by n^2: both sides stay exact integers,
    # so the whole statistic is one correctly-rounded division.
    expected_scaled = sum(
        counts_a[cat] * counts_b.get(cat, 0) for cat in counts_a
    )
    if expected_scaled == n * n:
        return None
    return (agree * n - expected_scaled) / (n * n - expected_scaled)


def fleiss_kappa(counts: Sequence[Sequence[int]]) -> Optional[float]:
    """Fleiss' kappa over an items x categories count matrix.

    Every row must sum to the same rater count ``n >= 2``. Returns ``None``
    when expected agreement is one (a single category used everywhere).
    """
    if not counts:
        raise EmptyInput("fleiss kappa needs at least one item")
    n = sum(counts[0])
    for i, row in enumerate(counts):
        if sum(row) != n:
            raise RaggedCounts(
                f"item {i} has {sum(row)} ratings, expected {n}"
            )
    if n < 2:
        raise RaggedCounts(f"need at least 2 raters per item, got {n}")
    n_items = len(counts)
    k = len(counts[0])
    category_totals = [sum(row[j] for row in counts) for j in range(k)]
    # Degenerate: all ratings in one category.
    if max(category_totals) == n_items * n:
        return None
    p_bar = sum(
        (sum(c * c for c in row) - n) / (n * (n - 1)) for row in counts
    ) / n_items
    p_e = sum((t / (n_items * n)) ** 2 for t in category_totals)
    return (p_bar - p_e) / (1.0 - p_e)


@dataclass(frozen=True)
class AnnotationRecord:
    """One annotator's label vector for one comment."""

    annotator_id: str
    comment_id: str
    labels: LabelVector
    submitted_at: int = 0  # epoch milliseconds


class RoundStatus(str, Enum):
    OPEN = "Open"
    PENDING_GATE = "PendingGate"
    PASSED = "Passed"
    REVISE = "Revise"


@dataclass
class AnnotationRound:
    """A batch of comments, its roster, and the records collected so far.

    Mutations must be serialized by the owning service; reports and votes
    are pure functions over a snapshot of ``records``.
    """

    round_id: str
    comments: list[Comment]
    annotators: list[str]
    kappa_threshold: float = DEFAULT_KAPPA_THRESHOLD
    annotators_per_comment: int = DEFAULT_ANNOTATORS_PER_COMMENT
    status: RoundStatus = RoundStatus.OPEN
    # Keyed by (annotator_id, comment_id); later submissions replace earlier.
    records: dict[tuple[str, str], AnnotationRecord] = field(default_factory=dict)
    overall_kappa: Optional[float] = None
    votes: Optional[list["VoteResult"]] = None

    def __post_init__(self):
        if not 0.0 < self.kappa_threshold < 1.0:
            raise ValueError(
                f"kappa threshold must be in (0, 1), got {self.kappa_threshold}"
            )
        self._comment_ids = {c.id for c in self.comments}

    def submit(self, record: AnnotationRecord) -> bool:
        """Add or replace a record; returns True when it replaced one."""
        if self.status is not RoundStatus.OPEN:
            raise RoundStateError(
                f"round {self.round_id} is {self.status.value}, not Open"
            )
        if record.annotator_id not in self.annotators:
            raise KeyError(f"annotator {record.annotator_id!r} not on the roster")
        if record.comment_id not in self._comment_ids:
            raise KeyError(f"comment {record.comment_id!r} not in this round")
        key = (record.annotator_id, record.comment_id)
        replaced = key in self.records
        self.records[key] = record
        return replaced

    def records_for_comment(self, comment_id: str) -> list[AnnotationRecord]:
        return [r for r in self.records.values() if r.comment_id == comment_id]

    def pending_comments(self, annotator_id: str) -> list[Comment]:
        """Comments the given annotator has not labeled yet."""
        if annotator_id not in self.annotators:
            raise KeyError(f"annotator {annotator_id!r} not on the roster")
        done = {
            comment_id
            for (who, comment_id) in self.records
            if who == annotator_id
        }
        return [c for c in self.comments if c.id not in done]

    def request_gate(self) -> None:
        if self.status is not RoundStatus.OPEN:
            raise RoundStateError(
                f"round {self.round_id} is {self.status.value}, not Open"
            )
        self.status = RoundStatus.PENDING_GATE


@dataclass(frozen=True)
class PairAgreement:
    """Kappa per target for one annotator pair, None where undefined."""

    annotator_a: str
    annotator_b: str
    per_target: dict[Target, Optional[float]]
    overlap: int  # co-annotated comments; 0 marks a NoOverlap pair


@dataclass(frozen=True)
class AgreementReport:
    """Pairwise kappa grid plus per-target and overall averages."""

    with_levels: bool
    pairs: list[PairAgreement]
    per_target_avg: dict[Target, Optional[float]]
    overall: Optional[float]
    undefined_count: int

    @property
    def no_overlap_pairs(self) -> list[tuple[str, str]]:
        return [
            (p.annotator_a, p.annotator_b) for p in self.pairs if p.overlap == 0
        ]


def agreement_report(round_: AnnotationRound, with_levels: bool) -> AgreementReport:
    """Pairwise Cohen's kappa per target, averaged per target then overall.

    ``with_levels=False`` collapses levels to mentioned/not-mentioned
    before computing agreement. Undefined kappas are excluded from the
    averages and counted; pairs with no co-annotated comments are
    reported with zero overlap rather than failing the report.
    """
    return _pairwise_report(round_.records, round_.annotators, with_levels)


def report_from_records(
    records: Sequence[AnnotationRecord], with_levels: bool
) -> AgreementReport:
    """Agreement over a flat record list, roster inferred from the records."""
    if not records:
        raise EmptyInput("agreement needs at least one record")
    keyed = {(r.annotator_id, r.comment_id): r for r in records}
    annotators = sorted({r.annotator_id for r in records})
    return _pairwise_report(keyed, annotators, with_levels)


def _pairwise_report(
    records: dict[tuple[str, str], AnnotationRecord],
    annotators: Sequence[str],
    with_levels: bool,
) -> AgreementReport:
    pairs: list[PairAgreement] = []
    undefined = 0
    for a, b in itertools.combinations(sorted(annotators), 2):
        shared = sorted(
            comment_id
            for (who, comment_id) in records
            if who == a and (b, comment_id) in records
        )
        per_target: dict[Target, Optional[float]] = {}
        if not shared:
            per_target = {t: None for t in TARGETS}
            undefined += len(TARGETS)
        else:
            for target in TARGETS:
                codes_a = [
                    _code(records[(a, cid)].labels, target, with_levels)
                    for cid in shared
                ]
                codes_b = [
                    _code(records[(b, cid)].labels, target, with_levels)
                    for cid in shared
                ]
                k = cohen_kappa(codes_a, codes_b)
                per_target[target] = k
                if k is None:
                    undefined += 1
        pairs.append(PairAgreement(a, b, per_target, len(shared)))

    per_target_avg: dict[Target, Optional[float]] = {}
    for target in TARGETS:
        defined = [
            p.per_target[target] for p in pairs if p.per_target[target] is not None
        ]
        per_target_avg[target] = (
            sum(defined) / len(defined) if defined else None
        )
    defined_avgs = [v for v in per_target_avg.values() if v is not None]
    overall = sum(defined_avgs) / len(defined_avgs) if defined_avgs else None
    return AgreementReport(
        with_levels=with_levels,
        pairs=pairs,
        per_target_avg=per_target_avg,
        overall=overall,
        undefined_count=undefined,
    )


def _code(labels: LabelVector, target: Target, with_levels: bool) -> int:
    level = labels.level_for(target)
    if with_levels:
        return int(level)
    return 0 if level is HatredLevel.NORMAL else 1


@dataclass(frozen=True)
class TargetVote:
    """Majority outcome for one target of one comment."""

    level: HatredLevel
    support: int
    tied: bool
    # All maximal candidates when tied, else empty.
    candidates: tuple[HatredLevel, ...] = ()


@dataclass(frozen=True)
class VoteResult:
    comment_id: str
    labels: LabelVector
    per_target: dict[Target, TargetVote]


def majority_vote(records: Sequence[AnnotationRecord]) -> VoteResult:
    """Per-target majority over the given records for a single comment.

    Ties among maximal counts go to the most severe level (highest code)
    and are flagged for adjudication.
    """
    if not records:
        raise EmptyInput("majority vote needs at least one record")
    comment_ids = {r.comment_id for r in records}
    if len(comment_ids) != 1:
        raise ValueError(f"records span multiple comments: {sorted(comment_ids)}")
    per_target: dict[Target, TargetVote] = {}
    levels: list[HatredLevel] = []
    for target in TARGETS:
        counts = Counter(r.labels.level_for(target) for r in records)
        top = max(counts.values())
        leaders = sorted(
            (lv for lv, c in counts.items() if c == top), key=int
        )
        winner = leaders[-1]
        tied = len(leaders) > 1
        per_target[target] = TargetVote(
            level=winner,
            support=top,
            tied=tied,
            candidates=tuple(leaders) if tied else (),
        )
        levels.append(winner)
    return VoteResult(
        comment_id=records[0].comment_id,
        labels=LabelVector(tuple(levels)),  # type: ignore[arg-type]
        per_target=per_target,
    )


def gate_round(round_: AnnotationRound) -> RoundStatus:
    """Decide a pending round: Passed strictly above the threshold.

    Passing finalizes votes for every annotated comment; a revise
    decision leaves labels unfinalized so the roster can discuss
    guidelines and reopen.
    """
    if round_.status is not RoundStatus.PENDING_GATE:
        raise RoundStateError(
            f"round {round_.round_id} is {round_.status.value}, not PendingGate"
        )
    report = agreement_report(round_, with_levels=True)
    if report.overall is None:
        raise GateIndeterminate(
            f"round {round_.round_id}: no defined kappa for any target"
        )
    round_.overall_kappa = report.overall
    if report.overall > round_.kappa_threshold:
        round_.status = RoundStatus.PASSED
        round_.votes = [
            majority_vote(round_.records_for_comment(c.id))
            for c in round_.comments
            if round_.records_for_comment(c.id)
        ]
    else:
        round_.status = RoundStatus.REVISE
        round_.votes = None
    return round_.status


def reopen_round(round_: AnnotationRound, new_round_id: str) -> AnnotationRound:
    """Spawn a fresh Open round over the same batch after a Revise."""
    if round_.status is not RoundStatus.REVISE:
        raise RoundStateError(
            f"round {round_.round_id} is {round_.status.value}, not Revise"
        )
    return AnnotationRound(
        round_id=new_round_id,
        comments=list(round_.comments),
        annotators=list(round_.annotators),
        kappa_threshold=round_.kappa_threshold,
        annotators_per_comment=round_.annotators_per_comment,
    )


# -- CSV interchange ---------------------------------------------------------

_RECORD_COLUMNS = ["annotator_id", "comment_id"] + [t.slug for t in TARGETS]


def load_records_csv(path: str) -> list[AnnotationRecord]:
    """Read annotation records from the sheet-style CSV layout."""
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise IoError(f"cannot read records {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in _RECORD_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}")
        records = []
        for index, row in enumerate(reader):
            try:
                codes = [int(row[t.slug]) for t in TARGETS]
            except (TypeError, ValueError):
                raise InvalidLevel(f"row {index}: non-integer level code") from None
            records.append(
                AnnotationRecord(
                    annotator_id=row["annotator_id"],
                    comment_id=row["comment_id"],
                    labels=LabelVector.from_codes(codes),
                )
            )
    if not records:
        raise EmptyInput(f"{path}: no annotation records")
    return records


def agreement_report_to_csv(report: AgreementReport, path: str) -> None:
    """Export the pair x target kappa grid plus a summary row."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pair"] + [t.slug for t in TARGETS] + ["average"])
        for pair in report.pairs:
            defined = [v for v in pair.per_target.values() if v is not None]
            row_avg = sum(defined) / len(defined) if defined else None
            writer.writerow(
                [f"{pair.annotator_a}|{pair.annotator_b}"]
                + [_cell(pair.per_target[t]) for t in TARGETS]
                + [_cell(row_avg)]
            )
        writer.writerow(
            ["average"]
            + [_cell(report.per_target_avg[t]) for t in TARGETS]
            + [_cell(report.overall)]
        )


def _cell(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.6f}"
