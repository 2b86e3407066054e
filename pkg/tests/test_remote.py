"""HTTP prediction client against a mocked transport."""

import json

import httpx
import pytest

from hatescope.classifier.remote import remote_predict
from hatescope.errors import ProtocolError, RemoteTimeout
from hatescope.labels import Comment, HatredLevel, LabelVector, Target

UNIFORM = [0.25, 0.25, 0.25, 0.25]
SLUGS = ["individuals", "groups", "religion/creed", "race/ethnicity", "politics"]


def respond_with(body, status_code=200):
    def handler(request):
        return httpx.Response(status_code, json=body)

    return httpx.MockTransport(handler)


def client_for(body, status_code=200):
    return httpx.Client(transport=respond_with(body, status_code))


def good_body(comment_id="c1", terms=(), probabilities=None):
    return {
        "id": comment_id,
        "probabilities": probabilities or {slug: list(UNIFORM) for slug in SLUGS},
        "terms": list(terms),
        "latency_ms": 1.5,
    }


COMMENT = Comment(id="c1", text="hello out there")


class TestHappyPath:
    def test_uniform_all_normal(self):
        with client_for(good_body()) as client:
            out = remote_predict("http://svc", COMMENT, client=client)
        assert out.comment_id == "c1"
        assert out.labels == LabelVector.normal()
        assert out.probabilities[Target.POLITICS] == tuple(UNIFORM)
        assert out.latency_ms >= 0
        assert out.model_id == "remote"

    def test_terms_decoded(self):
        body = good_body(terms=["individuals#hate", "groups#offensive"])
        with client_for(body) as client:
            out = remote_predict("http://svc", COMMENT, client=client)
        assert out.labels.level_for(Target.INDIVIDUALS) is HatredLevel.HATE
        assert out.labels.level_for(Target.GROUPS) is HatredLevel.OFFENSIVE
        assert out.labels.level_for(Target.POLITICS) is HatredLevel.NORMAL

    def test_model_id_passthrough(self):
        body = good_body()
        body["model_id"] = "blind-twin-7"
        with client_for(body) as client:
            out = remote_predict("http://svc", COMMENT, client=client)
        assert out.model_id == "blind-twin-7"

    def test_predict_suffix_appended_once(self):
        seen = []

        def handler(request):
            seen.append(str(request.url))
            return httpx.Response(200, json=good_body())

        with httpx.Client(transport=httpx.MockTransport(handler)) as client:
            remote_predict("http://svc", COMMENT, client=client)
            remote_predict("http://svc/predict", COMMENT, client=client)
        assert seen == ["http://svc/predict", "http://svc/predict"]

    def test_request_carries_id_and_text(self):
        captured = {}

        def handler(request):
            captured.update(json.loads(request.content))
            return httpx.Response(200, json=good_body())

        with httpx.Client(transport=httpx.MockTransport(handler)) as client:
            remote_predict("http://svc", COMMENT, client=client)
        assert captured == {"id": "c1", "text": "hello out there"}


class TestFailures:
    def test_timeout(self):
        def handler(request):
            raise httpx.ConnectTimeout("simulated")

        with httpx.Client(transport=httpx.MockTransport(handler)) as client:
            with pytest.raises(RemoteTimeout):
                remote_predict("http://svc", COMMENT, client=client)

    def test_connection_error(self):
        def handler(request):
            raise httpx.ConnectError("refused")

        with httpx.Client(transport=httpx.MockTransport(handler)) as client:
            with pytest.raises(RemoteTimeout):
                remote_predict("http://svc", COMMENT, client=client)

    def test_http_error_status(self):
        with client_for({"detail": "boom"}, status_code=500) as client:
            with pytest.raises(ProtocolError):
                remote_predict("http://svc", COMMENT, client=client)

    def test_non_json_body(self):
        def handler(request):
            return httpx.Response(200, text="<html>oops</html>")

        with httpx.Client(transport=httpx.MockTransport(handler)) as client:
            with pytest.raises(ProtocolError):
                remote_predict("http://svc", COMMENT, client=client)

    def test_id_mismatch(self):
        with client_for(good_body(comment_id="other")) as client:
            with pytest.raises(ProtocolError):
                remote_predict("http://svc", COMMENT, client=client)

    def test_missing_target_row(self):
        body = good_body()
        del body["probabilities"]["politics"]
        with client_for(body) as client:
            with pytest.raises(ProtocolError):
                remote_predict("http://svc", COMMENT, client=client)

    def test_wrong_row_length(self):
        body = good_body()
        body["probabilities"]["groups"] = [0.5, 0.5]
        with client_for(body) as client:
            with pytest.raises(ProtocolError):
                remote_predict("http://svc", COMMENT, client=client)

    def test_non_simplex_row(self):
        body = good_body()
        body["probabilities"]["groups"] = [0.5, 0.5, 0.5, 0.5]
        with client_for(body) as client:
            with pytest.raises(ProtocolError):
                remote_predict("http://svc", COMMENT, client=client)

    def test_negative_probability(self):
        body = good_body()
        body["probabilities"]["groups"] = [1.2, -0.2, 0.0, 0.0]
        with client_for(body) as client:
            with pytest.raises(ProtocolError):
                remote_predict("http://svc", COMMENT, client=client)

    def test_non_numeric_probability(self):
        body = good_body()
        body["probabilities"]["groups"] = ["a", 0.25, 0.25, 0.25]
        with client_for(body) as client:
            with pytest.raises(ProtocolError):
                remote_predict("http://svc", COMMENT, client=client)

    def test_bad_terms(self):
        for terms in [["individuals"], ["animals#hate"], ["individuals#normal"], [7]]:
            body = good_body()
            body["terms"] = terms
            with client_for(body) as client:
                with pytest.raises(ProtocolError):
                    remote_predict("http://svc", COMMENT, client=client)

    def test_missing_terms(self):
        body = good_body()
        del body["terms"]
        with client_for(body) as client:
            with pytest.raises(ProtocolError):
                remote_predict("http://svc", COMMENT, client=client)

    def test_non_object_body(self):
        with client_for([1, 2, 3]) as client:
            with pytest.raises(ProtocolError):
                remote_predict("http://svc", COMMENT, client=client)

    def test_tolerance_accepts_tiny_drift(self):
        body = good_body()
        body["probabilities"]["groups"] = [0.25, 0.25, 0.25, 0.2500000001]
        with client_for(body) as client:
            out = remote_predict("http://svc", COMMENT, client=client)
        assert out.comment_id == "c1"
