"""Command-line entry points for every offline workflow.

Exit codes: 0 success, 1 any domain error (with a diagnostic on stderr),
2 usage errors (unknown command or bad flags, handled by click).
"""

from __future__ import annotations

import csv
import functools
import json
import math
import sys
from pathlib import Path

import click

from ..agreement import (
    agreement_report_to_csv,
    load_records_csv,
    majority_vote,
    report_from_records,
)
from ..classifier.model import TrainConfig, load_model, predict_labels, save_model, train
from ..dataset import ColumnMap, load_dataset
from ..errors import AlignmentError, HatescopeError
from ..labels import (
    TARGETS,
    Comment,
    label_vector_to_terms,
    terms_to_label_vector,
)
from ..metrics import (
    dataset_stats,
    eval_to_json,
    evaluate as evaluate_reports,
    format_eval_text,
)
from ..streaming.pipeline import FileSink, run_pipeline
from ..streaming.records import PredictionRecord
from ..streaming.reports import aggregates_to_csv
from ..streaming.sources import replay_source
from .config import ServiceConfig

__all__ = ["main"]


def guarded(fn):
    """Turn domain errors into exit 1 with a one-line diagnostic."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except HatescopeError as exc:
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _column_map(text_column: str, id_column: str | None) -> ColumnMap:
    return ColumnMap(text=text_column, id=id_column)


@click.group()
def main():
    """Targeted hate speech tooling: datasets, agreement, models, streams."""


# -- dataset ----------------------------------------------------------------


@main.group()
def dataset():
    """Inspect and validate labeled CSV datasets."""


@dataset.command("stats")
@click.option("--input", "path", required=True, type=click.Path())
@click.option("--text-column", default="comment", show_default=True)
@click.option("--id-column", default=None)
@click.option("--json", "as_json", is_flag=True, help="machine-readable output")
@guarded
def dataset_stats_cmd(path: str, text_column: str, id_column: str | None, as_json: bool):
    """Corpus statistics: sizes, lengths, label distributions."""
    data = load_dataset(path, _column_map(text_column, id_column))
    stats = dataset_stats(data)
    if as_json:
        payload = {
            "n_comments": stats.n_comments,
            "vocabulary_size": stats.vocabulary_size,
            "total_tokens": stats.total_tokens,
            "avg_length": stats.avg_length,
            "length_quartiles": {
                "min": stats.min_length,
                "q1": stats.q1_length,
                "median": stats.median_length,
                "q3": stats.q3_length,
                "max": stats.max_length,
            },
            "target_count_hist": stats.target_count_hist,
            "per_target": {t.slug: stats.per_target[t] for t in TARGETS},
            "per_target_level": {
                t.slug: {
                    lv.name.lower(): stats.per_target_level[t][lv]
                    for lv in stats.per_target_level[t]
                }
                for t in TARGETS
            },
        }
        click.echo(json.dumps(payload, indent=2))
        return
    click.echo(f"comments:        {stats.n_comments}")
    click.echo(f"vocabulary:      {stats.vocabulary_size}")
    click.echo(f"total tokens:    {stats.total_tokens}")
    click.echo(f"avg length:      {stats.avg_length:.2f}")
    click.echo(
        "length quartiles: "
        f"min {stats.min_length}, q1 {stats.q1_length}, "
        f"median {stats.median_length}, q3 {stats.q3_length}, "
        f"max {stats.max_length}"
    )
    click.echo("targets per comment (count: comments):")
    for k in sorted(stats.target_count_hist):
        click.echo(f"  {k}: {stats.target_count_hist[k]}")
    click.echo("per-target mentions:")
    for t in TARGETS:
        click.echo(f"  {t.slug}: {stats.per_target[t]}")


@dataset.command("validate")
@click.option("--input", "path", required=True, type=click.Path())
@click.option("--text-column", default="comment", show_default=True)
@click.option("--id-column", default=None)
@guarded
def dataset_validate_cmd(path: str, text_column: str, id_column: str | None):
    """Exit 0 if the file parses cleanly, 1 with the first defect otherwise."""
    data = load_dataset(path, _column_map(text_column, id_column))
    click.echo(f"ok: {len(data)} comments")


# -- agreement / voting ------------------------------------------------------


@main.group()
def agreement():
    """Inter-annotator agreement over record CSVs."""


@agreement.command("compute")
@click.option("--records", "path", required=True, type=click.Path())
@click.option("--without-levels", is_flag=True, help="collapse levels to mentioned")
@click.option("--out", default=None, type=click.Path(), help="write the kappa grid CSV")
@guarded
def agreement_compute_cmd(path: str, without_levels: bool, out: str | None):
    """Pairwise per-target kappa plus averages."""
    records = load_records_csv(path)
    report = report_from_records(records, with_levels=not without_levels)
    for pair in report.pairs:
        cells = "  ".join(
            f"{t.slug}={_fmt(pair.per_target[t])}" for t in TARGETS
        )
        click.echo(f"{pair.annotator_a} x {pair.annotator_b} ({pair.overlap}): {cells}")
    avg = "  ".join(f"{t.slug}={_fmt(report.per_target_avg[t])}" for t in TARGETS)
    click.echo(f"per-target average: {avg}")
    click.echo(f"overall: {_fmt(report.overall)}")
    if report.undefined_count:
        click.echo(f"undefined kappas excluded: {report.undefined_count}")
    if out:
        agreement_report_to_csv(report, out)
        click.echo(f"wrote {out}")


def _fmt(value: float | None) -> str:
    return "undef" if value is None else f"{value:.4f}"


@main.command("vote")
@click.option("--records", "path", required=True, type=click.Path())
@click.option("--out", default=None, type=click.Path(), help="write final labels CSV")
@guarded
def vote_cmd(path: str, out: str | None):
    """Majority labels per comment, most severe level on ties."""
    records = load_records_csv(path)
    by_comment: dict[str, list] = {}
    for record in records:
        by_comment.setdefault(record.comment_id, []).append(record)
    votes = [majority_vote(group) for group in by_comment.values()]
    rows = []
    for vote in votes:
        tied = [t.slug for t in TARGETS if vote.per_target[t].tied]
        rows.append((vote.comment_id, vote.labels.to_codes(), tied))
        terms = ", ".join(str(t) for t in label_vector_to_terms(vote.labels)) or "-"
        flag = f"  TIES: {';'.join(tied)}" if tied else ""
        click.echo(f"{vote.comment_id}: {terms}{flag}")
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["comment_id"] + [t.slug for t in TARGETS] + ["tied_targets"]
            )
            for comment_id, codes, tied in rows:
                writer.writerow([comment_id] + list(codes) + [";".join(tied)])
        click.echo(f"wrote {out}")


# -- model -------------------------------------------------------------------


@main.command("train")
@click.option("--input", "path", required=True, type=click.Path())
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--text-column", default="comment", show_default=True)
@click.option("--id-column", default=None)
@click.option("--dim", default=2 ** 18, show_default=True)
@click.option("--learning-rate", default=0.05, show_default=True)
@click.option("--momentum", default=0.9, show_default=True)
@click.option("--epochs", default=10, show_default=True)
@click.option("--batch-size", default=32, show_default=True)
@click.option("--l2", default=1e-5, show_default=True)
@click.option("--seed", default=42, show_default=True)
@guarded
def train_cmd(
    path: str,
    model_path: str,
    text_column: str,
    id_column: str | None,
    dim: int,
    learning_rate: float,
    momentum: float,
    epochs: int,
    batch_size: int,
    l2: float,
    seed: int,
):
    """Fit the linear model on a labeled CSV and save it."""
    data = load_dataset(path, _column_map(text_column, id_column))
    config = TrainConfig(
        learning_rate=learning_rate,
        momentum=momentum,
        epochs=epochs,
        batch_size=batch_size,
        l2=l2,
        seed=seed,
        dim=dim,
    )
    model = train(data, config)
    save_model(model, model_path)
    click.echo(
        f"trained {model.model_id} on {len(data)} comments; "
        f"loss {model.loss_curve[0]:.4f} -> {model.loss_curve[-1]:.4f}; "
        f"saved {model_path}"
    )


@main.command("predict")
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--input", "path", default=None, type=click.Path(), help="CSV of comments")
@click.option("--text", default=None, help="single comment text")
@click.option("--text-column", default="comment", show_default=True)
@click.option("--id-column", default=None)
@click.option("--out", default=None, type=click.Path(), help="write records NDJSON")
@guarded
def predict_cmd(
    model_path: str,
    path: str | None,
    text: str | None,
    text_column: str,
    id_column: str | None,
    out: str | None,
):
    """Classify comments; emits one prediction record per line."""
    if (path is None) == (text is None):
        raise click.UsageError("pass exactly one of --input or --text")
    model = load_model(model_path)
    if text is not None:
        comments = [Comment(id="cli-0", text=text)]
    else:
        comments = [lc.comment for lc in load_dataset(path, _column_map(text_column, id_column))]
    lines = []
    for comment in comments:
        output = predict_labels(model, comment)
        record = PredictionRecord(
            comment_id=output.comment_id,
            terms=tuple(label_vector_to_terms(output.labels)),
            model_id=output.model_id,
            latency_ms=output.latency_ms,
            processed_ts=0,
        )
        lines.append(record.to_json())
    body = "\n".join(lines) + ("\n" if lines else "")
    if out:
        Path(out).write_text(body, encoding="utf-8")
        click.echo(f"wrote {len(lines)} records to {out}")
    else:
        click.echo(body, nl=False)


@main.command("evaluate")
@click.option("--pred", "pred_path", required=True, type=click.Path(),
              help="prediction records NDJSON")
@click.option("--gold", "gold_path", required=True, type=click.Path(),
              help="labeled CSV")
@click.option("--text-column", default="comment", show_default=True)
@click.option("--id-column", default=None)
@click.option("--json", "as_json", is_flag=True)
@guarded
def evaluate_cmd(
    pred_path: str,
    gold_path: str,
    text_column: str,
    id_column: str | None,
    as_json: bool,
):
    """Set-based scores for both task views against gold labels."""
    predictions = {}
    with open(pred_path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = PredictionRecord.from_json(line)
            if record.comment_id in predictions:
                raise AlignmentError(
                    f"duplicate prediction for id {record.comment_id!r}"
                )
            predictions[record.comment_id] = terms_to_label_vector(record.terms)
    gold = {
        lc.comment.id: lc.labels
        for lc in load_dataset(gold_path, _column_map(text_column, id_column))
    }
    reports = evaluate_reports(predictions, gold)
    click.echo(json.dumps(json.loads(eval_to_json(reports)), indent=2)
               if as_json else format_eval_text(reports))


# -- streaming ----------------------------------------------------------------


@main.group()
def stream():
    """Replay captures through the classification pipeline."""


def _run_stream(
    capture: str,
    speed: float,
    model_path: str,
    sink_path: str,
    partitions: int,
    workers: int,
    aggregates_path: str | None,
    latency_path: str | None,
    deadletter_path: str | None,
) -> None:
    model = load_model(model_path)
    source = replay_source(capture, speed=speed)
    with FileSink(sink_path) as sink:
        report = run_pipeline(
            source,
            model,
            sink,
            partitions=partitions,
            workers=workers,
            dead_letter_path=deadletter_path,
        )
    click.echo(
        f"ingested {report.n_source}, sunk {report.n_sunk} "
        f"({report.n_duplicates_skipped} duplicate deliveries absorbed), "
        f"dead-lettered {report.n_dead_letters}, "
        f"restarts {report.worker_restarts}, sink failures {report.sink_failures}, "
        f"{report.elapsed_s:.2f}s"
    )
    if report.latency is not None:
        for row in report.latency.rows():
            click.echo(
                f"latency[{row.model_id}] n={row.count} min={row.min:.1f} "
                f"q25={row.q25:.1f} median={row.median:.1f} mean={row.mean:.1f} "
                f"q75={row.q75:.1f} max={row.max:.1f}"
            )
        if latency_path:
            rows = [
                {
                    "model": r.model_id,
                    "count": r.count,
                    "min": r.min,
                    "q25": r.q25,
                    "median": r.median,
                    "mean": r.mean,
                    "q75": r.q75,
                    "max": r.max,
                }
                for r in report.latency.rows()
            ]
            Path(latency_path).write_text(
                json.dumps({"rows": rows}, indent=2) + "\n", encoding="utf-8"
            )
    if aggregates_path:
        Path(aggregates_path).write_text(
            aggregates_to_csv(report.windows), encoding="utf-8"
        )
        click.echo(f"wrote {aggregates_path}")


@stream.command("replay")
@click.option("--input", "capture", required=True, type=click.Path())
@click.option("--speed", default=math.inf, show_default="unthrottled")
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--sink", "sink_path", required=True, type=click.Path())
@click.option("--partitions", default=4, show_default=True)
@click.option("--workers", default=2, show_default=True)
@click.option("--aggregates", default=None, type=click.Path())
@click.option("--deadletter", default=None, type=click.Path())
@guarded
def stream_replay_cmd(
    capture: str,
    speed: float,
    model_path: str,
    sink_path: str,
    partitions: int,
    workers: int,
    aggregates: str | None,
    deadletter: str | None,
):
    """One-off pipeline run from a capture file."""
    _run_stream(
        capture, speed, model_path, sink_path, partitions, workers,
        aggregates, None, deadletter,
    )


@stream.command("run")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--input", "capture", required=True, type=click.Path())
@click.option("--speed", default=math.inf, show_default="unthrottled")
@guarded
def stream_run_cmd(config_path: str, capture: str, speed: float):
    """Pipeline run using service config; artifacts land in the data dir."""
    config = ServiceConfig.from_file(config_path)
    if not config.model_path:
        raise click.UsageError("config has no model_path; stream run needs a model")
    out = Path(config.data_dir) / "stream"
    out.mkdir(parents=True, exist_ok=True)
    _run_stream(
        capture,
        speed,
        config.model_path,
        str(out / "sink.jsonl"),
        config.partitions,
        config.workers,
        str(out / "aggregates.csv"),
        str(out / "latency.json"),
        str(out / "deadletter.jsonl"),
    )
    click.echo(f"artifacts under {out}")


# -- service -------------------------------------------------------------------


@main.command("serve")
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
@click.option("--data-dir", default=None, type=click.Path())
@click.option("--model", "model_path", default=None, type=click.Path())
@guarded
def serve_cmd(
    config_path: str | None,
    host: str | None,
    port: int | None,
    data_dir: str | None,
    model_path: str | None,
):
    """Run the HTTP service."""
    import uvicorn

    from .api import create_app

    overrides = {
        "host": host,
        "port": port,
        "data_dir": data_dir,
        "model_path": model_path,
    }
    if config_path:
        config = ServiceConfig.from_file(config_path, **overrides)
    else:
        config = ServiceConfig(
            **{k: v for k, v in overrides.items() if v is not None}
        )
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")


if __name__ == "__main__":
    main()
