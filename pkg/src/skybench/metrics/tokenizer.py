"""Shared text tokenization.

Every text comparison in the harness goes through this one function so that
scores are reproducible bit-for-bit: lowercase, punctuation to spaces, split
on whitespace. Tokens contain only word characters, which makes the function
idempotent (tokenize(" ".join(tokens)) == tokens).
"""

from __future__ import annotations

import re

_NON_WORD = re.compile(r"[^\w\s]")


def tokenize(text: str) -> list[str]:
    return _NON_WORD.sub(" ", text.lower()).split()
