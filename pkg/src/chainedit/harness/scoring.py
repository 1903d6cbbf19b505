"""Answer scoring: whole-token alias containment."""

from __future__ import annotations

import re
from typing import Iterable


def _canon(text: str) -> str:
    return " ".join(text.split()).casefold()


def score_answer(answer: str, gold_aliases: Iterable[str]) -> bool:
    """True iff the answer contains any gold alias as a whole token.

    Both sides are whitespace-collapsed and casefolded first, and the
    alias must not sit inside a larger word, so "Maryland" does not
    match the alias "Mary" but "Mary Smith is her mother" matches
    "Mary Smith".
    """
    text = _canon(answer)
    if not text:
        return False
    for alias in gold_aliases:
        needle = _canon(alias)
        if needle and re.search(rf"(?<!\w){re.escape(needle)}(?!\w)", text):
            return True
    return False
