"""String alignment: edit distance, fuzzy substring matching, entity
relabeling against noisy transcriptions, and word error rate.

Fuzzy similarity is normalized Levenshtein, `round(100 * (1 - d/max_len))`,
chosen over third-party heuristics because it is exactly reproducible.
Substring matching scans whole word windows (up to twice the query's word
count) case-insensitively, but returns the hypothesis text with its casing
intact, since ASR casing is unreliable.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

from .manifest import RelationInstance, Triplet

_WORD_RE = re.compile(r"\S+")
_RELABEL_TAG = "|relabeled"
_DROPPED_RE = re.compile(r"\|dropped=(\d+)$")

DEFAULT_RELABEL_THRESHOLD = 50


def levenshtein(a: str, b: str) -> int:
    """Minimum number of single-character insertions, deletions, and
    substitutions transforming `a` into `b`.  Case-sensitive."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(b) > len(a):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        curr = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            curr.append(min(prev[j] + 1, curr[j - 1] + 1, prev[j - 1] + cost))
        prev = curr
    return prev[-1]


def fuzzy_ratio(a: str, b: str) -> int:
    """Similarity in [0, 100]: 100 iff equal (two empty strings count as equal)."""
    if not a and not b:
        return 100
    longest = max(len(a), len(b))
    return round(Fraction(100 * (longest - levenshtein(a, b)), longest))


@dataclass(frozen=True)
class AlignmentResult:
    """Best fuzzy match of a query inside a hypothesis text.

    matched is hypothesis[span[0]:span[1]] verbatim; score is the
    case-folded fuzzy_ratio between query and match.
    """

    matched: str
    score: int
    span: tuple[int, int]


def _trim_edge_punct(text: str, start: int, end: int) -> tuple[int, int]:
    while start < end and unicodedata.category(text[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(text[end - 1]).startswith("P"):
        end -= 1
    return start, end


def best_fuzzy_substring(entity: str, text: str) -> AlignmentResult:
    """Best-scoring whole-word window of `text` for `entity`.

    Windows span 1 to max(1, 2 * word count of entity) consecutive words;
    each window is also tried with leading/trailing punctuation trimmed,
    so an exact entity mention scores 100 even when it abuts sentence
    punctuation.  Ties prefer the leftmost start, then the shorter span.
    """
    words = list(_WORD_RE.finditer(text))
    if not words:
        raise ValueError("cannot match against empty text")
    entity_cf = entity.casefold()
    cap = max(1, 2 * len(entity.split()))
    best: AlignmentResult | None = None
    for i in range(len(words)):
        for j in range(i, min(i + cap, len(words))):
            spans = [(words[i].start(), words[j].end())]
            trimmed = _trim_edge_punct(text, *spans[0])
            if trimmed != spans[0] and trimmed[1] > trimmed[0]:
                spans.append(trimmed)
            for start, end in spans:
                score = fuzzy_ratio(entity_cf, text[start:end].casefold())
                if (
                    best is None
                    or score > best.score
                    or (score == best.score and (start, end - start) < (best.span[0], best.span[1] - best.span[0]))
                ):
                    best = AlignmentResult(text[start:end], score, (start, end))
    return best


def _mark_relabeled(source: str, new_drops: int) -> str:
    m = _DROPPED_RE.search(source)
    if m:
        base, drops = source[: m.start()], int(m.group(1)) + new_drops
    elif source.endswith(_RELABEL_TAG):
        base, drops = source, new_drops
    else:
        base, drops = source + _RELABEL_TAG, new_drops
    return base + (f"|dropped={drops}" if drops else "")


def relabel_instance(
    inst: RelationInstance, hypothesis: str, threshold: int = DEFAULT_RELABEL_THRESHOLD
) -> RelationInstance:
    """Rewrite gold entities to their best fuzzy matches in `hypothesis`.

    The transcript is replaced by the hypothesis; relation labels are kept.
    A triplet whose head or tail scores below `threshold` is dropped, and
    the running drop count is recorded in the instance source tag.
    Idempotent for a fixed hypothesis.
    """
    if not inst.triplets:
        raise ValueError(f"instance {inst.id!r} has no triplets to relabel")
    if not hypothesis.split():
        raise ValueError("empty hypothesis")
    kept: list[Triplet] = []
    drops = 0
    for t in inst.triplets:
        head = best_fuzzy_substring(t.head, hypothesis)
        tail = best_fuzzy_substring(t.tail, hypothesis)
        if head.score < threshold or tail.score < threshold:
            drops += 1
            continue
        kept.append(Triplet(head.matched, t.relation, tail.matched))
    return replace(
        inst,
        transcript=hypothesis,
        triplets=tuple(kept),
        source=_mark_relabeled(inst.source, drops),
    )


def wer(reference: Sequence[str], hypothesis: Sequence[str]) -> Fraction:
    """Word error rate: (substitutions + deletions + insertions) / |reference|.

    Exact rational; can exceed 1 when the hypothesis is much longer than
    the reference.
    """
    if not reference:
        raise ValueError("empty reference")
    return Fraction(edit_distance(reference, hypothesis), len(reference))


def edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    """Levenshtein distance between two token sequences."""
    if len(b) > len(a):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i in range(1, len(a) + 1):
        curr = [i]
        for j in range(1, len(b) + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            curr.append(min(prev[j] + 1, curr[j - 1] + 1, prev[j - 1] + cost))
        prev = curr
    return prev[-1]


__all__ = [
    "DEFAULT_RELABEL_THRESHOLD",
    "AlignmentResult",
    "levenshtein",
    "fuzzy_ratio",
    "best_fuzzy_substring",
    "relabel_instance",
    "wer",
    "edit_distance",
]
