"""Message text cleanup and tokenization.

The pipeline applies, in order: strip URLs / e-mails / @-mentions, lowercase,
drop all punctuation except ``, . ! ?``, collapse character runs longer than
two to exactly two, and squeeze whitespace.  Tokens are then produced by
whitespace splitting with each kept punctuation mark isolated as its own
token.  Apostrophes are not in the kept set, so "it's" becomes "its".

Stemming is off and stop-words are kept by default; both switches exist only
for the alternative (stemmed, stop-word-free) feature variant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

KEPT_PUNCT = (",", ".", "!", "?")

_URL_RE = re.compile(r"(?:https?://\S+|www\.\S+)", re.IGNORECASE)
_EMAIL_RE = re.compile(r"\S+@\S+\.\S+")
_MENTION_RE = re.compile(r"@\w+")
_REPEAT_RE = re.compile(r"(.)\1{2,}", re.DOTALL)
_PUNCT_SPLIT_RE = re.compile(r"([,.!?])")

# Small inventory for the optional stop-word-removal variant.
STOP_WORDS = frozenset(
    """a an the and or but if then than so as of at by for with about into
    through during to from in out on off over under again further here there
    all any both each few more most other some such only own same too very
    s t just don now i me my we our you your he him his she her it its they
    them their what which who this that these those am is are was were be
    been being have has had having do does did doing will would shall should
    can could may might must""".split()
)


@dataclass(frozen=True)
class TokenizedMessage:
    """Cleaned, ordered tokens of one message."""

    tokens: tuple[str, ...]

    @property
    def retained_punct(self) -> tuple[str, ...]:
        """The kept punctuation occurrences, in token order."""
        return tuple(t for t in self.tokens if t in KEPT_PUNCT)

    def __len__(self) -> int:
        return len(self.tokens)


def _light_stem(token: str) -> str:
    """Crude suffix stripper for the stemmed feature variant."""
    for suffix in ("ing", "ed", "ly", "es", "s"):
        if token.endswith(suffix) and len(token) - len(suffix) >= 3:
            if suffix == "s" and token.endswith("ss"):
                continue
            return token[: -len(suffix)]
    return token


def preprocess(raw_text: str, *, stem: bool = False, remove_stopwords: bool = False) -> TokenizedMessage:
    """Run the five cleanup steps and tokenize; empty input gives no tokens."""
    text = _URL_RE.sub(" ", raw_text)
    text = _EMAIL_RE.sub(" ", text)
    text = _MENTION_RE.sub(" ", text)
    text = text.lower()
    # deletion, not substitution: "it's" must become "its"
    text = "".join(
        ch for ch in text if ch.isalnum() or ch.isspace() or ch in KEPT_PUNCT
    )
    text = _REPEAT_RE.sub(r"\1\1", text)
    text = " ".join(text.split())

    tokens = _PUNCT_SPLIT_RE.sub(r" \1 ", text).split()
    if remove_stopwords:
        tokens = [t for t in tokens if t not in STOP_WORDS]
    if stem:
        tokens = [t if t in KEPT_PUNCT else _light_stem(t) for t in tokens]
    return TokenizedMessage(tuple(tokens))


def render(msg: TokenizedMessage) -> str:
    """Inverse-ish of tokenization: join tokens with single spaces."""
    return " ".join(msg.tokens)
