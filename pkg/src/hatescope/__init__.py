"""Targeted hate speech detection for Vietnamese online comments.

Five fixed targets, four hatred levels each. The package covers the
whole workflow: label algebra and preprocessing, kappa-gated annotation
rounds with majority voting, a hashed-feature multi-head linear
classifier, set-based evaluation, a log-bus streaming pipeline with
exactly-once sink semantics, and an HTTP service plus CLI on top.
"""

from .agreement import (
    AgreementReport,
    AnnotationRecord,
    AnnotationRound,
    RoundStatus,
    VoteResult,
    agreement_report,
    cohen_kappa,
    fleiss_kappa,
    gate_round,
    majority_vote,
    reopen_round,
    report_from_records,
)
from .dataset import ColumnMap, load_dataset, write_dataset
from .errors import HatescopeError
from .labels import (
    TARGETS,
    Comment,
    HatredLevel,
    LabeledComment,
    LabelVector,
    Target,
    TargetLevelTerm,
    format_label_list,
    label_vector_to_terms,
    parse_label_list,
    terms_to_label_vector,
)
from .metrics import (
    dataset_stats,
    evaluate,
    per_target_confusion,
    target_level_prf,
    target_only_prf,
)
from .preprocess import preprocess_text, tokenize

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "HatescopeError",
    "Target",
    "HatredLevel",
    "LabelVector",
    "TargetLevelTerm",
    "Comment",
    "LabeledComment",
    "TARGETS",
    "parse_label_list",
    "format_label_list",
    "terms_to_label_vector",
    "label_vector_to_terms",
    "preprocess_text",
    "tokenize",
    "ColumnMap",
    "load_dataset",
    "write_dataset",
    "cohen_kappa",
    "fleiss_kappa",
    "AgreementReport",
    "AnnotationRecord",
    "AnnotationRound",
    "RoundStatus",
    "VoteResult",
    "agreement_report",
    "report_from_records",
    "majority_vote",
    "gate_round",
    "reopen_round",
    "evaluate",
    "target_only_prf",
    "target_level_prf",
    "per_target_confusion",
    "dataset_stats",
]
