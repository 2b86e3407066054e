"""HTTP client for external prediction services.

Any model that speaks the POST /predict wire contract can stand in for
the local linear model: request {"id", "text"}, response {"id",
"probabilities": {slug: [4 reals]}, "terms": ["slug#level"], "latency_ms"}.
Responses are validated hard; a malformed or non-simplex payload is a
protocol error, not a silent bad prediction.
"""

from __future__ import annotations

import math
import time

import httpx

from ..errors import ProtocolError, RemoteTimeout
from ..labels import TARGETS, Comment, Target, TargetLevelTerm, terms_to_label_vector
from .model import N_LEVELS, PredictionOutput

__all__ = ["remote_predict", "SIMPLEX_TOLERANCE"]

SIMPLEX_TOLERANCE = 1e-6

DEFAULT_TIMEOUT_S = 10.0


def remote_predict(
    endpoint: str,
    comment: Comment,
    timeout: float = DEFAULT_TIMEOUT_S,
    client: httpx.Client | None = None,
) -> PredictionOutput:
    """POST one comment to ``endpoint`` and decode the response.

    ``endpoint`` is the base URL; /predict is appended if absent. Total
    latency includes the round trip, not just the server-reported time.
    """
    url = endpoint.rstrip("/")
    if not url.endswith("/predict"):
        url += "/predict"
    payload = {"id": comment.id, "text": comment.text}
    started = time.perf_counter()
    try:
        if client is not None:
            response = client.post(url, json=payload, timeout=timeout)
        else:
            response = httpx.post(url, json=payload, timeout=timeout)
    except httpx.TimeoutException as exc:
        raise RemoteTimeout(f"no answer from {url} within {timeout}s") from exc
    except httpx.HTTPError as exc:
        raise RemoteTimeout(f"cannot reach {url}: {exc}") from exc
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    if response.status_code != 200:
        raise ProtocolError(
            f"{url} answered HTTP {response.status_code}: {response.text[:200]}"
        )
    try:
        body = response.json()
    except ValueError as exc:
        raise ProtocolError(f"{url} returned non-JSON body") from exc
    return _decode_response(body, comment, elapsed_ms)


def _decode_response(
    body: object, comment: Comment, elapsed_ms: float
) -> PredictionOutput:
    if not isinstance(body, dict):
        raise ProtocolError(f"response must be an object, got {type(body).__name__}")
    if body.get("id") != comment.id:
        raise ProtocolError(
            f"response id {body.get('id')!r} does not match request id {comment.id!r}"
        )
    raw_probs = body.get("probabilities")
    if not isinstance(raw_probs, dict):
        raise ProtocolError("response lacks a probabilities object")
    probabilities: dict[Target, tuple[float, ...]] = {}
    for target in TARGETS:
        row = raw_probs.get(target.slug)
        if not isinstance(row, list) or len(row) != N_LEVELS:
            raise ProtocolError(
                f"probabilities[{target.slug!r}] must be a list of {N_LEVELS} reals"
            )
        try:
            values = tuple(float(v) for v in row)
        except (TypeError, ValueError):
            raise ProtocolError(
                f"probabilities[{target.slug!r}] contains non-numeric entries"
            ) from None
        if any(v < 0 or not math.isfinite(v) for v in values):
            raise ProtocolError(
                f"probabilities[{target.slug!r}] has negative or non-finite entries"
            )
        if abs(sum(values) - 1.0) > SIMPLEX_TOLERANCE:
            raise ProtocolError(
                f"probabilities[{target.slug!r}] sums to {sum(values)}, not 1"
            )
        probabilities[target] = values
    terms = body.get("terms")
    if not isinstance(terms, list) or not all(isinstance(t, str) for t in terms):
        raise ProtocolError("response lacks a terms list of strings")
    try:
        labels = terms_to_label_vector(TargetLevelTerm.parse(t) for t in terms)
    except Exception as exc:
        raise ProtocolError(f"unparseable terms {terms!r}: {exc}") from exc
    return PredictionOutput(
        comment_id=comment.id,
        probabilities=probabilities,  # type: ignore[arg-type]
        labels=labels,
        model_id=str(body.get("model_id", "remote")),
        latency_ms=elapsed_ms,
    )
