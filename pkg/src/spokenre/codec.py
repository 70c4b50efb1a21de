"""Linearized triplet serialization and parsing.

A triplet list is serialized for generative decoding as::

    <triplet> head <subj> tail <obj> relation

per triplet, consecutive triplets joined by a single space.  Parsing comes
in two flavors: `parse_strict` for gold data (any deviation is an error
with a character offset) and `parse_lenient` for raw model generations
(total function; malformed segments are dropped and reported as warnings
so hallucinated fragments never earn scoring credit).
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from typing import Iterable

from .manifest import RESERVED_MARKERS, Triplet

WARNING_KINDS = ("truncated_triplet", "missing_field", "empty_field", "stray_text")

# Markers count only as whole whitespace-delimited tokens, mirroring their
# life as atomic vocabulary items; "x<subj>" is field text, not a marker.
_MARKER_RE = re.compile(
    "|".join(rf"(?<!\S){re.escape(m)}(?!\S)" for m in RESERVED_MARKERS)
)


class ParseError(ValueError):
    """Strict-mode parse failure, pointing at the first offending offset."""

    def __init__(self, kind: str, position: int, detail: str):
        super().__init__(f"{kind} at offset {position}: {detail}")
        self.kind = kind
        self.position = position
        self.detail = detail


@dataclass(frozen=True)
class ParseWarning:
    """One recovered-from anomaly in a lenient parse.

    kind is one of WARNING_KINDS; position is a character offset into the
    input (len(input) marks end-of-string).
    """

    kind: str
    position: int
    detail: str

    def __post_init__(self):
        if self.kind not in WARNING_KINDS:
            raise ValueError(f"unknown warning kind {self.kind!r}")
        if self.position < 0:
            raise ValueError("warning position must be non-negative")


@dataclass(frozen=True)
class NormalizationPolicy:
    """Which surface transforms to apply before comparing entity strings."""

    casefold: bool = False
    strip_punct: bool = False
    collapse_ws: bool = True


def linearize(triplets: Iterable[Triplet]) -> str:
    """Serialize triplets to the marker-delimited target string."""
    return " ".join(f"<triplet> {t.head} <subj> {t.tail} <obj> {t.relation}" for t in triplets)


def _collapse(s: str) -> str:
    return " ".join(s.split())


def _first_nonspace(s: str, start: int = 0) -> int:
    for i in range(start, len(s)):
        if not s[i].isspace():
            return i
    return len(s)


def _scan(s: str) -> tuple[list[Triplet], list[ParseWarning]]:
    triplets: list[Triplet] = []
    warnings: list[ParseWarning] = []
    markers = list(_MARKER_RE.finditer(s))
    starts = [i for i, m in enumerate(markers) if m.group() == "<triplet>"]

    if not starts:
        if s.strip():
            warnings.append(ParseWarning("stray_text", _first_nonspace(s), "no <triplet> marker found"))
        return triplets, warnings

    lead_end = markers[starts[0]].start()
    if s[:lead_end].strip():
        warnings.append(
            ParseWarning("stray_text", _first_nonspace(s), "text before the first <triplet> marker")
        )

    for n, mi in enumerate(starts):
        seg_begin = markers[mi].end()
        last = n + 1 == len(starts)
        seg_end = len(s) if last else markers[starts[n + 1]].start()
        next_mi = len(markers) if last else starts[n + 1]
        inner = markers[mi + 1:next_mi]
        shape = [m.group() for m in inner]

        if shape == ["<subj>", "<obj>"]:
            subj, obj = inner
            head = _collapse(s[seg_begin:subj.start()])
            tail = _collapse(s[subj.end():obj.start()])
            relation = _collapse(s[obj.end():seg_end])
            glued = next(
                (m for m in RESERVED_MARKERS for f in (head, tail, relation) if m in f), None
            )
            if glued is not None:
                warnings.append(
                    ParseWarning("stray_text", seg_begin, f"field text contains {glued}")
                )
            elif head and tail and relation:
                triplets.append(Triplet(head, relation, tail))
            elif not relation and last:
                warnings.append(ParseWarning("truncated_triplet", len(s), "empty relation at end of input"))
            else:
                name = "head" if not head else ("tail" if not tail else "relation")
                pos = seg_begin if not head else (subj.end() if not tail else obj.end())
                warnings.append(ParseWarning("empty_field", min(pos, len(s)), f"empty {name}"))
        elif shape in ([], ["<subj>"]):
            missing = "<subj>" if not shape else "<obj>"
            if last:
                warnings.append(ParseWarning("truncated_triplet", len(s), f"input ends before {missing}"))
            else:
                warnings.append(ParseWarning("missing_field", seg_end, f"triplet segment has no {missing}"))
        else:
            expected = ["<subj>", "<obj>"]
            bad = next(
                m for i, m in enumerate(inner)
                if i >= len(expected) or m.group() != expected[i]
            )
            warnings.append(
                ParseWarning("stray_text", bad.start(), f"unexpected {bad.group()} marker in triplet segment")
            )
    return triplets, warnings


def parse_lenient(s: str) -> tuple[list[Triplet], list[ParseWarning]]:
    """Recover every well-formed triplet from a raw generation.

    Never raises: incomplete or malformed segments are dropped, each
    producing exactly one warning.  On strict-valid input this returns
    the same triplets as `parse_strict` with zero warnings.
    """
    return _scan(s)


def parse_strict(s: str) -> list[Triplet]:
    """Parse a linearization exactly; whitespace runs are equivalent to one space.

    Raises ParseError at the first deviation (stray text, missing marker
    or field, empty field).
    """
    triplets, warnings = _scan(s)
    if warnings:
        w = min(warnings, key=lambda w: w.position)
        kind = "missing_field" if w.kind == "truncated_triplet" else w.kind
        raise ParseError(kind, w.position, w.detail)
    return triplets


def normalize_surface(s: str, policy: NormalizationPolicy) -> str:
    """Apply the policy's transforms (collapse_ws, then strip_punct, then casefold).

    Idempotent: whitespace runs opened up by punctuation removal are
    re-collapsed when collapse_ws is on.
    """
    if policy.collapse_ws:
        s = _collapse(s)
    if policy.strip_punct:
        s = "".join(ch for ch in s if not unicodedata.category(ch).startswith("P"))
        if policy.collapse_ws:
            s = _collapse(s)
    if policy.casefold:
        s = s.casefold()
    return s


__all__ = [
    "WARNING_KINDS",
    "ParseError",
    "ParseWarning",
    "NormalizationPolicy",
    "linearize",
    "parse_strict",
    "parse_lenient",
    "normalize_surface",
]
