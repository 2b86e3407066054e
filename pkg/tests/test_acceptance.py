"""Acceptance gate: the headline guarantees, one test per criterion.

Every test runs inside the shared ``criterion`` context from conftest,
which enforces a runtime budget and prints one PASS/FAIL/SKIP line per
criterion in the terminal summary. Oracles here are deliberately
independent reimplementations (exact rational kappa, per-comment set
pooling, central-difference gradients) rather than calls back into the
code under test.
"""

from __future__ import annotations

import json
import math
import os
import random
from collections import Counter
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from hatescope.agreement import (
    AnnotationRecord,
    AnnotationRound,
    RoundStatus,
    cohen_kappa,
    gate_round,
)
from hatescope.classifier.features import extract_features
from hatescope.classifier.model import (
    MultiHeadLinearModel,
    TrainConfig,
    loss_and_grad,
    predict_labels,
    train,
)
from hatescope.dataset import ColumnMap, load_dataset
from hatescope.errors import HatescopeError
from hatescope.labels import (
    TARGETS,
    Comment,
    HatredLevel,
    LabeledComment,
    LabelVector,
    Target,
)
from hatescope.metrics import dataset_stats, target_level_prf, target_only_prf
from hatescope.streaming.pipeline import (
    PREDICTIONS_TOPIC,
    FlakySink,
    MemoryDocumentSink,
    crash_injector,
    run_pipeline,
)
from hatescope.streaming.sources import replay_source

# -- independent oracles -------------------------------------------------------


def oracle_cohen_kappa(a, b):
    """Contingency-table kappa in exact rational arithmetic."""
    n = len(a)
    table = Counter(zip(a, b))
    categories = sorted(set(a) | set(b))
    observed = Fraction(sum(table[(c, c)] for c in categories), n)
    row = {
        c: Fraction(sum(v for (x, _), v in table.items() if x == c), n)
        for c in categories
    }
    col = {
        c: Fraction(sum(v for (_, y), v in table.items() if y == c), n)
        for c in categories
    }
    expected = sum(row[c] * col[c] for c in categories)
    if expected == 1:
        return None
    return (observed - expected) / (1 - expected)


def mention_set(vector):
    return {t for t in TARGETS if vector.level_for(t) is not HatredLevel.NORMAL}


def tuple_set(vector):
    return {
        (t, vector.level_for(t))
        for t in TARGETS
        if vector.level_for(t) is not HatredLevel.NORMAL
    }


def oracle_micro(predictions, references, to_set):
    correct = predicted = reference = 0
    for cid in predictions:
        p = to_set(predictions[cid])
        t = to_set(references[cid])
        correct += len(p & t)
        predicted += len(p)
        reference += len(t)
    precision = correct / predicted if predicted else 0.0
    recall = correct / reference if reference else 0.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return correct, predicted, reference, precision, recall, f1


def numeric_gradient(model, batch, features, l2, h=1e-5):
    """Central differences over every parameter."""
    grad_w = np.zeros_like(model.weights)
    grad_b = np.zeros_like(model.biases)

    def objective():
        value, _, _ = loss_and_grad(model, batch, l2=l2, features=features)
        return value

    for array, grad in ((model.weights, grad_w), (model.biases, grad_b)):
        it = np.nditer(array, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            original = array[idx]
            array[idx] = original + h
            plus = objective()
            array[idx] = original - h
            minus = objective()
            array[idx] = original
            grad[idx] = (plus - minus) / (2 * h)
            it.iternext()
    return grad_w, grad_b


# -- criterion 1: pairwise agreement vs exact oracle ---------------------------


def test_kappa_matches_exact_oracle(criterion):
    with criterion("cohen kappa vs exact-rational oracle (200 random pairs)", 1.0):
        assert cohen_kappa([0, 0, 1, 1, 2, 2], [0, 0, 1, 2, 2, 2]) == 0.75
        rng = random.Random(2024)
        for _ in range(200):
            n = rng.randint(1, 50)
            a = [rng.randint(0, 3) for _ in range(n)]
            b = [rng.randint(0, 3) for _ in range(n)]
            expected = oracle_cohen_kappa(a, b)
            actual = cohen_kappa(a, b)
            if expected is None:
                assert actual is None
            else:
                assert actual == pytest.approx(float(expected), abs=1e-12)


# -- criterion 2: set-based scoring vs brute force -----------------------------


def random_vector(rng):
    codes = [rng.randint(1, 3) if rng.random() < 0.4 else 0 for _ in range(5)]
    return LabelVector.from_codes(codes)


def test_metrics_match_set_oracle(criterion):
    with criterion("set-based P/R/F1 vs brute force (500 random corpora)", 5.0):
        # Hand-derived two-comment fixtures: 2/3 on targets, 1/3 on tuples.
        references = {
            "c1": LabelVector.from_codes([3, 3, 0, 0, 0]),
            "c2": LabelVector.from_codes([0, 3, 0, 0, 0]),
        }
        predictions = {
            "c1": LabelVector.from_codes([2, 0, 0, 0, 1]),
            "c2": LabelVector.from_codes([0, 3, 0, 0, 0]),
        }
        assert target_only_prf(predictions, references).micro.f1 == pytest.approx(2 / 3)
        assert target_level_prf(predictions, references).micro.f1 == pytest.approx(1 / 3)

        rng = random.Random(77)
        for _ in range(500):
            n = rng.randint(1, 30)
            refs = {f"c{i}": random_vector(rng) for i in range(n)}
            preds = {f"c{i}": random_vector(rng) for i in range(n)}
            for view, to_set in (
                (target_only_prf, mention_set),
                (target_level_prf, tuple_set),
            ):
                report = view(preds, refs)
                correct, predicted, reference, p, r, f1 = oracle_micro(
                    preds, refs, to_set
                )
                assert report.micro.n_correct == correct
                assert report.micro.n_predicted == predicted
                assert report.micro.n_reference == reference
                assert report.micro.precision == p
                assert report.micro.recall == r
                assert report.micro.f1 == f1
            # Matching on (target, level) can never beat matching on target.
            target_view = target_only_prf(preds, refs)
            tuple_view = target_level_prf(preds, refs)
            assert tuple_view.micro.n_correct <= target_view.micro.n_correct
            assert tuple_view.micro.precision <= target_view.micro.precision + 1e-12
            assert tuple_view.micro.recall <= target_view.micro.recall + 1e-12


# -- criterion 3: published corpus statistics ----------------------------------

PUBLISHED_REQUIRED = {
    "train": {
        "n_comments": 7000,
        "median_length": 38,
        "max_length": 714,
        "per_target": {
            "individuals": 5480,
            "groups": 2977,
            "religion/creed": 24,
            "race/ethnicity": 502,
            "politics": 363,
        },
    },
    "dev": {
        "n_comments": 1201,
        "median_length": 38,
        "per_target": {
            "individuals": 938,
            "groups": 517,
            "religion/creed": 8,
            "race/ethnicity": 74,
            "politics": 57,
        },
    },
    "test": {
        "n_comments": 1800,
        "median_length": 38,
        "per_target": {
            "individuals": 1398,
            "groups": 769,
            "religion/creed": 6,
            "race/ethnicity": 129,
            "politics": 89,
        },
    },
}

# Published but tokenizer- or schema-sensitive; compared in the report
# without failing the criterion.
PUBLISHED_INFORMATIONAL = {
    "train": {
        "min_length": 1, "q1_length": 21, "q3_length": 70,
        "vocabulary_size": 12701,
        "target_count_hist": {0: 883, 1: 3228, 2: 2586, 3: 269, 4: 31, 5: 3},
    },
    "dev": {
        "min_length": 1, "q1_length": 22, "q3_length": 68, "max_length": 512,
        "vocabulary_size": 4547,
        "target_count_hist": {0: 154, 1: 560, 2: 437, 3: 41, 4: 8, 5: 1},
    },
    "test": {
        "min_length": 1, "q1_length": 21, "q3_length": 67, "max_length": 583,
        "vocabulary_size": 5684,
        "target_count_hist": {0: 225, 1: 838, 2: 672, 3: 51, 4: 14, 5: 0},
    },
}


def locate_corpus():
    roots = []
    env = os.environ.get("HATESCOPE_DATA")
    if env:
        roots.append(Path(env))
    roots.append(Path(__file__).resolve().parents[1] / "data")
    for root in roots:
        files = {split: root / f"{split}.csv" for split in ("train", "dev", "test")}
        if all(f.is_file() for f in files.values()):
            return files
    return None


def stats_value(stats, field):
    if field == "per_target":
        return {t.slug: stats.per_target[t] for t in TARGETS}
    return getattr(stats, field)


def test_corpus_statistics_reproduce_published_numbers(criterion):
    with criterion("corpus statistics reproduce the published splits", 30.0):
        files = locate_corpus()
        if files is None:
            pytest.skip(
                "labeled corpus not present; set HATESCOPE_DATA or place "
                "train.csv/dev.csv/test.csv under data/"
            )
        divergences = []
        notes = []
        for split, path in files.items():
            try:
                stats = dataset_stats(load_dataset(str(path), ColumnMap()))
            except HatescopeError as exc:
                divergences.append(f"{split}: cannot load with default schema: {exc}")
                continue
            for field, expected in PUBLISHED_REQUIRED[split].items():
                actual = stats_value(stats, field)
                if actual != expected:
                    divergences.append(
                        f"{split}.{field}: published {expected!r}, got {actual!r}"
                    )
            for field, expected in PUBLISHED_INFORMATIONAL[split].items():
                actual = stats_value(stats, field)
                if actual != expected:
                    notes.append(
                        f"{split}.{field}: published {expected!r}, got {actual!r} "
                        "(informational; tokenizer- or schema-sensitive)"
                    )
        if notes:
            print("\n".join(["corpus divergence notes:"] + notes))
        if divergences:
            pytest.fail("\n".join(["corpus statistics diverge:"] + divergences))


# -- criterion 4: classifier numerics ------------------------------------------

LABEL_CLASSES = [
    (0, 0, 0, 0, 0),
    (1, 0, 0, 0, 0),
    (3, 0, 0, 0, 0),
    (0, 2, 0, 0, 0),
    (0, 0, 3, 0, 0),
    (0, 0, 0, 2, 0),
    (0, 0, 0, 0, 3),
    (2, 2, 0, 0, 0),
]

FILLERS = ["the", "and", "of", "to", "from", "with"]


def synthetic_corpus(rng, n, prefix):
    """Separable labeled comments: each class has its own token family."""
    rows = []
    for i in range(n):
        k = rng.randrange(len(LABEL_CLASSES))
        words = [f"class{k}tok{rng.randint(0, 7)}" for _ in range(5)]
        words += [rng.choice(FILLERS) for _ in range(3)]
        rng.shuffle(words)
        rows.append(
            LabeledComment(
                Comment(id=f"{prefix}{i:04d}", text=" ".join(words)),
                LabelVector.from_codes(LABEL_CLASSES[k]),
            )
        )
    return rows


def random_numeric_model(rng, dim, scale=0.5):
    return MultiHeadLinearModel(
        weights=rng.normal(0.0, scale, size=(5, 4, dim)),
        biases=rng.normal(0.0, scale, size=(5, 4)),
        dim=dim,
        seed=0,
    )


def test_classifier_numerics(criterion):
    with criterion("classifier gradients, losses, determinism, lift", 600.0):
        # Analytic gradient vs central differences on 20 random instances.
        words = ["alpha", "beta", "gamma", "delta", "mu", "nu", "xi", "rho"]
        rng = np.random.default_rng(404)
        for trial in range(20):
            dim = int(rng.integers(4, 65))
            l2 = float(rng.choice([0.0, 1e-3]))
            batch = []
            for i in range(int(rng.integers(1, 4))):
                text = " ".join(
                    rng.choice(words) for _ in range(int(rng.integers(1, 6)))
                )
                batch.append(
                    LabeledComment(
                        Comment(id=f"g{trial}-{i}", text=text),
                        LabelVector.from_codes(rng.integers(0, 4, size=5).tolist()),
                    )
                )
            features = [extract_features(lc.comment.text, dim=dim) for lc in batch]
            model = random_numeric_model(rng, dim)
            _, grad_w, grad_b = loss_and_grad(model, batch, l2=l2, features=features)
            num_w, num_b = numeric_gradient(model, batch, features, l2)
            for analytic, numeric in ((grad_w, num_w), (grad_b, num_b)):
                denom = max(
                    np.linalg.norm(analytic.ravel()),
                    np.linalg.norm(numeric.ravel()),
                    1e-12,
                )
                rel = np.linalg.norm((analytic - numeric).ravel()) / denom
                assert rel < 1e-4

        # An untrained model is exactly the uniform predictor.
        zero = MultiHeadLinearModel.zeros(dim=64)
        batch = [
            LabeledComment(
                Comment(id="u", text="alpha beta"),
                LabelVector.from_codes([0, 1, 2, 3, 0]),
            )
        ]
        features = [extract_features("alpha beta", dim=64)]
        loss, _, _ = loss_and_grad(zero, batch, l2=0.0, features=features)
        assert loss == pytest.approx(5 * math.log(4), abs=1e-9)

        # Seeded training is bit-exact across runs.
        py_rng = random.Random(9001)
        train_split = synthetic_corpus(py_rng, 400, "tr")
        test_split = synthetic_corpus(py_rng, 200, "te")
        config = TrainConfig(
            learning_rate=0.5, momentum=0.9, epochs=12, batch_size=16,
            l2=0.0, seed=7, dim=2 ** 14,
        )
        model_a = train(train_split, config)
        model_b = train(train_split, config)
        assert model_a.model_id == model_b.model_id
        assert model_a.weights.tobytes() == model_b.weights.tobytes()
        assert model_a.biases.tobytes() == model_b.biases.tobytes()
        assert model_a.loss_curve == model_b.loss_curve

        # Trained model strictly beats the constant most-frequent-vector
        # predictor on held-out target-only micro F1.
        most_frequent = Counter(
            lc.labels.to_codes() for lc in train_split
        ).most_common(1)[0][0]
        gold = {lc.comment.id: lc.labels for lc in test_split}
        constant = {
            cid: LabelVector.from_codes(most_frequent) for cid in gold
        }
        learned = {
            lc.comment.id: predict_labels(model_a, lc.comment).labels
            for lc in test_split
        }
        baseline_f1 = target_only_prf(constant, gold).micro.f1
        trained_f1 = target_only_prf(learned, gold).micro.f1
        assert trained_f1 > baseline_f1


# -- criterion 5: exactly-once streaming under faults --------------------------


def term_assigning_predictor(comment):
    """Deterministic labels derived from the comment id digits."""
    from hatescope.classifier.model import PredictionOutput

    number = int("".join(ch for ch in comment.id if ch.isdigit()) or 0)
    codes = [0, 0, 0, 0, 0]
    if number % 2:
        codes[0] = 3
    if number % 3 == 0:
        codes[1] = 1
    if number % 7 == 0:
        codes[4] = 2
    return PredictionOutput(
        comment_id=comment.id,
        probabilities={t: (1.0, 0.0, 0.0, 0.0) for t in Target},
        labels=LabelVector.from_codes(codes),
        model_id="synthetic",
        latency_ms=0.05 + (number % 10) * 0.01,
    )


def test_streaming_exactly_once_under_faults(criterion, tmp_path):
    with criterion("streaming exactly-once under crashes and sink faults", 120.0):
        capture = tmp_path / "capture.ndjson"
        with capture.open("w", encoding="utf-8") as fh:
            for i in range(1000):
                fh.write(
                    json.dumps(
                        {"id": f"s{i:04d}", "ts": 1_000 + i, "text": f"comment {i}"}
                    )
                    + "\n"
                )
        inner = MemoryDocumentSink()
        flaky = FlakySink(inner, seed=23, fail_before=0.02, fail_after=0.02)
        report = run_pipeline(
            replay_source(str(capture), speed=math.inf),
            term_assigning_predictor,
            flaky,
            partitions=4,
            workers=3,
            worker_fault=crash_injector(0.004, seed=17, max_crashes=8),
            max_wait_s=90,
        )

        # Exactly once: every comment present, nothing twice, nothing lost.
        records = inner.records()
        ids = [r.comment_id for r in records]
        assert report.n_source == 1000
        assert report.n_sunk == 1000
        assert len(ids) == 1000
        assert len(set(ids)) == 1000
        assert set(ids) == {f"s{i:04d}" for i in range(1000)}
        assert report.n_dead_letters == 0
        # The faults actually fired; delivery still converged.
        assert report.sink_failures == flaky.failures
        assert report.sink_failures >= 1
        assert report.worker_restarts >= 1

        # Per-partition order: first write to the sink follows first
        # publication within every predictions partition.
        positions = {cid: i for i, cid in enumerate(ids)}
        for p in range(4):
            published = [
                m.payload.comment_id
                for m in report.bus.messages(PREDICTIONS_TOPIC, p)
            ]
            first_seen = []
            seen = set()
            for cid in published:
                if cid not in seen:
                    seen.add(cid)
                    first_seen.append(cid)
            assert sorted(first_seen, key=positions.__getitem__) == first_seen

        # Window aggregates conserve the emitted term count.
        total_terms = sum(len(r.terms) for r in records)
        windowed = sum(w.total() for w in report.windows)
        late = sum(len(r.terms) for r in report.late_records)
        assert windowed + late == total_terms
        assert total_terms > 0

        # Latency report: six statistics per model, correctly ordered.
        stats = report.latency.per_model["synthetic"]
        assert stats.count == 1000
        assert stats.min <= stats.q25 <= stats.median <= stats.q75 <= stats.max
        assert stats.min <= stats.mean <= stats.max


# -- criterion 6: gate lifecycle -----------------------------------------------


def submit_symmetric_pattern(round_, per_target_pattern):
    """Two annotators whose per-target tables are symmetric by design."""
    for i, comment in enumerate(round_.comments):
        codes_a = []
        codes_b = []
        for t_index in range(5):
            agree, disagree = per_target_pattern[t_index]
            half = agree + disagree
            a_code = 0 if i < half else 1
            pos = i if i < half else i - half
            b_code = a_code if pos < agree else 1 - a_code
            codes_a.append(a_code)
            codes_b.append(b_code)
        for annotator, codes in (("a", codes_a), ("b", codes_b)):
            round_.submit(
                AnnotationRecord(
                    annotator_id=annotator,
                    comment_id=comment.id,
                    labels=LabelVector.from_codes(codes),
                )
            )


def two_rater_round(round_id, n_comments):
    return AnnotationRound(
        round_id=round_id,
        comments=[
            Comment(id=f"c{i:03d}", text=f"comment {i}") for i in range(n_comments)
        ],
        annotators=["a", "b"],
        annotators_per_comment=2,
    )


def test_gate_lifecycle(criterion):
    with criterion("kappa gate passes at 0.45 and revises at 0.39", 1.0):
        passing = two_rater_round("accept-pass", 80)
        submit_symmetric_pattern(passing, {i: (29, 11) for i in range(5)})
        passing.request_gate()
        decision = gate_round(passing)
        assert passing.overall_kappa == pytest.approx(0.45, abs=1e-12)
        assert decision is RoundStatus.PASSED
        assert passing.status is RoundStatus.PASSED
        assert passing.votes is not None
        assert len(passing.votes) == 80

        revising = two_rater_round("accept-revise", 80)
        pattern = {0: (27, 13), 1: (27, 13), 2: (27, 13), 3: (29, 11), 4: (29, 11)}
        submit_symmetric_pattern(revising, pattern)
        revising.request_gate()
        decision = gate_round(revising)
        assert revising.overall_kappa == pytest.approx(0.39, abs=1e-12)
        assert decision is RoundStatus.REVISE
        assert revising.status is RoundStatus.REVISE
        assert revising.votes is None
