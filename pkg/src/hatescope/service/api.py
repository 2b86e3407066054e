"""HTTP service: annotation rounds, prediction, and stream run reports.

Round mutations funnel through the journaled store, so anything the API
confirms is already durable. Error mapping: unknown round 404, writes
against a round in the wrong status 409, bad label codes or roster
violations 422, prediction without a loaded model 503.
"""

from __future__ import annotations

import time
import uuid
from typing import Optional

from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from ..agreement import (
    AgreementReport,
    AnnotationRecord,
    AnnotationRound,
    RoundStatus,
    agreement_report,
)
from ..classifier.model import MultiHeadLinearModel, load_model, predict_labels
from ..errors import (
    GateIndeterminate,
    HatescopeError,
    RoundStateError,
)
from ..labels import TARGETS, Comment, LabelVector, label_vector_to_terms
from ..streaming.pipeline import RunReport
from ..streaming.reports import aggregates_to_csv
from .config import ServiceConfig
from .store import RoundStore

__all__ = ["create_app", "attach_run_report"]


class CommentIn(BaseModel):
    id: str
    text: str
    timestamp: Optional[int] = None
    source: str = ""


class RoundCreateIn(BaseModel):
    round_id: Optional[str] = None
    comments: list[CommentIn]
    annotators: list[str]
    kappa_threshold: Optional[float] = None
    annotators_per_comment: Optional[int] = None


class AnnotationIn(BaseModel):
    round_id: str
    annotator_id: str
    comment_id: str
    codes: list[int] = Field(min_length=5, max_length=5)


class PredictIn(BaseModel):
    id: str
    text: str


def _round_summary(round_: AnnotationRound) -> dict:
    progress = {a: 0 for a in round_.annotators}
    for annotator_id, _ in round_.records:
        progress[annotator_id] += 1
    return {
        "round_id": round_.round_id,
        "status": round_.status.value,
        "kappa_threshold": round_.kappa_threshold,
        "annotators_per_comment": round_.annotators_per_comment,
        "annotators": list(round_.annotators),
        "n_comments": len(round_.comments),
        "n_records": len(round_.records),
        "overall_kappa": round_.overall_kappa,
        "progress": progress,
    }


def _report_payload(report: AgreementReport) -> dict:
    return {
        "pairs": [
            {
                "a": p.annotator_a,
                "b": p.annotator_b,
                "overlap": p.overlap,
                "kappas": {t.slug: p.per_target[t] for t in TARGETS},
            }
            for p in report.pairs
        ],
        "per_target": {t.slug: report.per_target_avg[t] for t in TARGETS},
        "overall": report.overall,
        "undefined_count": report.undefined_count,
    }


def create_app(
    config: ServiceConfig,
    model: Optional[MultiHeadLinearModel] = None,
) -> FastAPI:
    app = FastAPI(title="hatescope", docs_url=None, redoc_url=None)
    # The annotation workbench is served as static files from whatever
    # origin is convenient, so the API answers cross-origin requests.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.config = config
    app.state.store = RoundStore(config.data_dir)
    if model is None and config.model_path:
        model = load_model(config.model_path)
    app.state.model = model
    app.state.run_report = None

    def _get_round(round_id: str) -> AnnotationRound:
        round_ = app.state.store.get(round_id)
        if round_ is None:
            raise HTTPException(404, f"no round named {round_id!r}")
        return round_

    @app.post("/rounds")
    def create_round(body: RoundCreateIn):
        if not body.comments:
            raise HTTPException(422, "a round needs at least one comment")
        if not body.annotators:
            raise HTTPException(422, "a round needs at least one annotator")
        if len(set(c.id for c in body.comments)) != len(body.comments):
            raise HTTPException(422, "duplicate comment ids in round")
        round_id = body.round_id or f"round-{uuid.uuid4().hex[:12]}"
        try:
            round_ = app.state.store.create_round(
                round_id=round_id,
                comments=[
                    Comment(
                        id=c.id,
                        text=c.text,
                        timestamp=c.timestamp,
                        source=c.source,
                    )
                    for c in body.comments
                ],
                annotators=list(body.annotators),
                kappa_threshold=(
                    body.kappa_threshold
                    if body.kappa_threshold is not None
                    else config.kappa_threshold
                ),
                annotators_per_comment=(
                    body.annotators_per_comment
                    if body.annotators_per_comment is not None
                    else config.annotators_per_comment
                ),
            )
        except RoundStateError as exc:
            raise HTTPException(409, str(exc)) from exc
        except (ValueError, HatescopeError) as exc:
            raise HTTPException(422, str(exc)) from exc
        return _round_summary(round_)

    @app.get("/rounds/{round_id}")
    def round_status(round_id: str):
        return _round_summary(_get_round(round_id))

    @app.get("/rounds/{round_id}/tasks")
    def round_tasks(round_id: str, annotator: str = Query(...)):
        round_ = _get_round(round_id)
        try:
            pending = round_.pending_comments(annotator)
        except KeyError as exc:
            raise HTTPException(422, str(exc)) from exc
        return {
            "round_id": round_id,
            "annotator": annotator,
            "status": round_.status.value,
            "tasks": [{"id": c.id, "text": c.text} for c in pending],
            "n_total": len(round_.comments),
            "n_done": len(round_.comments) - len(pending),
        }

    @app.post("/annotations")
    def submit_annotation(body: AnnotationIn):
        round_ = _get_round(body.round_id)
        if any(code < 0 or code > 3 for code in body.codes):
            raise HTTPException(422, f"level codes must be 0..3, got {body.codes}")
        record = AnnotationRecord(
            annotator_id=body.annotator_id,
            comment_id=body.comment_id,
            labels=LabelVector.from_codes(body.codes),
            submitted_at=int(time.time() * 1000),
        )
        try:
            replaced = app.state.store.submit(body.round_id, record)
        except RoundStateError as exc:
            raise HTTPException(409, str(exc)) from exc
        except KeyError as exc:
            raise HTTPException(422, str(exc.args[0])) from exc
        return {
            "round_id": body.round_id,
            "replaced": replaced,
            "n_records": len(round_.records),
        }

    @app.get("/rounds/{round_id}/agreement")
    def round_agreement(round_id: str):
        round_ = _get_round(round_id)
        return {
            "round_id": round_id,
            "with_levels": _report_payload(agreement_report(round_, True)),
            "without_levels": _report_payload(agreement_report(round_, False)),
        }

    @app.post("/rounds/{round_id}/gate")
    def run_gate(round_id: str):
        try:
            round_ = app.state.store.gate(round_id)
        except KeyError:
            raise HTTPException(404, f"no round named {round_id!r}") from None
        except GateIndeterminate as exc:
            raise HTTPException(409, str(exc)) from exc
        except RoundStateError as exc:
            raise HTTPException(409, str(exc)) from exc
        return {
            "round_id": round_id,
            "status": round_.status.value,
            "overall_kappa": round_.overall_kappa,
            "kappa_threshold": round_.kappa_threshold,
        }

    @app.post("/rounds/{round_id}/vote")
    def finalize_votes(round_id: str):
        round_ = _get_round(round_id)
        if round_.status is not RoundStatus.PASSED or round_.votes is None:
            raise HTTPException(
                409,
                f"round {round_id!r} is {round_.status.value}; "
                "votes finalize only after a Passed gate",
            )
        votes = []
        ties = []
        for vote in round_.votes:
            tied_targets = [
                t.slug for t in TARGETS if vote.per_target[t].tied
            ]
            if tied_targets:
                ties.append({"comment_id": vote.comment_id, "targets": tied_targets})
            votes.append(
                {
                    "comment_id": vote.comment_id,
                    "codes": vote.labels.to_codes(),
                    "terms": [str(t) for t in label_vector_to_terms(vote.labels)],
                    "per_target": {
                        t.slug: {
                            "level": int(vote.per_target[t].level),
                            "support": vote.per_target[t].support,
                            "tied": vote.per_target[t].tied,
                            "candidates": [
                                int(c) for c in vote.per_target[t].candidates
                            ],
                        }
                        for t in TARGETS
                    },
                }
            )
        return {"round_id": round_id, "votes": votes, "ties": ties}

    @app.post("/predict")
    def predict(body: PredictIn):
        model: Optional[MultiHeadLinearModel] = app.state.model
        if model is None:
            raise HTTPException(503, "no model is loaded")
        try:
            comment = Comment(id=body.id, text=body.text)
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from exc
        output = predict_labels(model, comment)
        return {
            "id": output.comment_id,
            "probabilities": {
                t.slug: list(output.probabilities[t]) for t in TARGETS
            },
            "terms": [str(t) for t in label_vector_to_terms(output.labels)],
            "latency_ms": output.latency_ms,
        }

    @app.get("/stream/latency")
    def stream_latency():
        report: Optional[RunReport] = app.state.run_report
        if report is None or report.latency is None:
            raise HTTPException(404, "no stream run recorded")
        return {
            "rows": [
                {
                    "model": s.model_id,
                    "count": s.count,
                    "min": s.min,
                    "q25": s.q25,
                    "median": s.median,
                    "mean": s.mean,
                    "q75": s.q75,
                    "max": s.max,
                }
                for s in report.latency.rows()
            ]
        }

    @app.get("/stream/aggregates")
    def stream_aggregates():
        report: Optional[RunReport] = app.state.run_report
        if report is None:
            raise HTTPException(404, "no stream run recorded")
        return Response(
            content=aggregates_to_csv(report.windows), media_type="text/csv"
        )

    return app


def attach_run_report(app: FastAPI, report: RunReport) -> None:
    """Expose a finished pipeline run through the stream endpoints."""
    app.state.run_report = report
