"""Text normalization and tokenization."""

import unicodedata

from hypothesis import given
from hypothesis import strategies as st

from hatescope.preprocess import URL_TOKEN, preprocess_text, tokenize


class TestPreprocess:
    def test_lowercase(self):
        assert preprocess_text("HeLLo WoRLD") == "hello world"

    def test_url_replacement(self):
        assert preprocess_text("see https://example.com/x?y=1 now") == f"see {URL_TOKEN} now"
        assert preprocess_text("www.example.com leads") == f"{URL_TOKEN} leads"

    def test_url_token_survives_lowercasing(self):
        assert URL_TOKEN in preprocess_text("HTTP://EXAMPLE.COM")

    def test_run_collapse_to_three(self):
        assert preprocess_text("soooooo cool") == "sooo cool"
        assert preprocess_text("!!!!!!") == "!!!"
        # Runs of exactly three stay as they are.
        assert preprocess_text("sooo") == "sooo"

    def test_whitespace_collapse(self):
        assert preprocess_text("  a \t b \n c  ") == "a b c"

    def test_control_chars_stripped(self):
        assert preprocess_text("a\x00b\x07c") == "abc"

    def test_nfc_normalization(self):
        decomposed = "éclair"  # e + combining acute
        assert preprocess_text(decomposed) == unicodedata.normalize("NFC", decomposed)

    def test_emoji_preserved(self):
        assert preprocess_text("nice \U0001f600 day") == "nice \U0001f600 day"

    def test_idempotent_examples(self):
        for text in ["hello world", "sooo cool", f"a {URL_TOKEN} b", "\U0001f62d ok"]:
            assert preprocess_text(preprocess_text(text)) == preprocess_text(text)


class TestTokenize:
    def test_words_and_punctuation_split(self):
        assert tokenize("don't stop!") == ["don", "'", "t", "stop", "!"]

    def test_empty(self):
        assert tokenize("") == []

    def test_no_whitespace_tokens(self):
        for token in tokenize(preprocess_text("a  b\t\nc !  ?")):
            assert token.strip() == token
            assert token != ""


@given(st.text(max_size=200))
def test_preprocess_idempotent(text):
    once = preprocess_text(text)
    assert preprocess_text(once) == once


@given(st.text(max_size=200))
def test_preprocess_never_leaves_double_spaces(text):
    cleaned = preprocess_text(text)
    assert "  " not in cleaned
    assert cleaned == cleaned.strip()


@given(st.text(max_size=200))
def test_tokenize_covers_non_space_content(text):
    cleaned = preprocess_text(text)
    assert "".join(tokenize(cleaned)) == "".join(cleaned.split())
