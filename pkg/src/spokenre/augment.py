"""Pseudo-label filtering and per-relation sampling.

A pseudo-labeled candidate is dropped when any of its triplets, checked in
this fixed order, (1) carries the relation "no_relation", (2) is missing a
head or tail entity (an instance with no triplets at all counts here too),
(3) has a pronoun for both head and tail, or (4) carries a relation outside
the allowed inventory.  Each dropped instance yields exactly one record
citing the first rule that fired, so drop statistics are deterministic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Iterable, Mapping, Sequence

from .manifest import RelationInstance

DROP_REASONS = ("no_relation", "missing_entity", "pronoun_pair", "foreign_relation")

NO_RELATION_LABEL = "no_relation"


@dataclass(frozen=True)
class DropRecord:
    """Why one pseudo-labeled instance was filtered out."""

    id: str
    reason: str
    detail: str

    def __post_init__(self):
        if self.reason not in DROP_REASONS:
            raise ValueError(f"unknown drop reason {self.reason!r}")


def default_pronouns() -> frozenset[str]:
    """The bundled case-folded pronoun lexicon."""
    text = resources.files("spokenre").joinpath("data/pronouns.txt").read_text(encoding="utf-8")
    return frozenset(
        line.strip().casefold()
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


def _first_violation(inst: RelationInstance, allowed: frozenset[str], pronouns: frozenset[str]):
    if any(t.relation == NO_RELATION_LABEL for t in inst.triplets):
        return "no_relation", f"triplet labeled {NO_RELATION_LABEL!r}"
    if not inst.triplets:
        return "missing_entity", "no triplets generated"
    for t in inst.triplets:
        if not t.head or not t.tail:
            side = "head" if not t.head else "tail"
            return "missing_entity", f"empty {side} in ({t.head!r}, {t.relation!r}, {t.tail!r})"
    for t in inst.triplets:
        if t.head.casefold() in pronouns and t.tail.casefold() in pronouns:
            return "pronoun_pair", f"({t.head!r}, {t.relation!r}, {t.tail!r})"
    for t in inst.triplets:
        if t.relation not in allowed:
            return "foreign_relation", f"relation {t.relation!r} not in the allowed inventory"
    return None


def filter_pseudo(
    candidates: Iterable[RelationInstance],
    allowed_relations: Iterable[str],
    pronouns: Iterable[str] | None = None,
) -> tuple[list[RelationInstance], list[DropRecord]]:
    """Partition pseudo-labeled candidates into kept instances and drop records.

    Order is preserved on both sides; kept + dropped covers the input
    exactly.  Raises for candidates whose source is not "pseudo".
    """
    allowed = frozenset(allowed_relations)
    pronoun_set = default_pronouns() if pronouns is None else frozenset(p.casefold() for p in pronouns)
    kept: list[RelationInstance] = []
    dropped: list[DropRecord] = []
    for inst in candidates:
        if inst.source != "pseudo":
            raise ValueError(f"instance {inst.id!r} has source {inst.source!r}, expected 'pseudo'")
        violation = _first_violation(inst, allowed, pronoun_set)
        if violation is None:
            kept.append(inst)
        else:
            dropped.append(DropRecord(inst.id, *violation))
    return kept, dropped


def sample_per_relation(
    kept: Sequence[RelationInstance],
    gold_counts: Mapping[str, int],
    factor: float | Fraction,
    seed: int = 0,
) -> list[RelationInstance]:
    """Sample round(factor * gold count) instances per relation, capped by availability.

    Candidates must be single-triplet instances.  Sampling is uniform
    without replacement with a per-relation derived seed, so results do
    not depend on evaluation order; output is sorted by relation then id.
    """
    if factor < 0:
        raise ValueError("factor must be non-negative")
    by_relation: dict[str, list[RelationInstance]] = {}
    for inst in kept:
        if len(inst.triplets) != 1:
            raise ValueError(
                f"instance {inst.id!r} has {len(inst.triplets)} triplets; sampling expects exactly one"
            )
        by_relation.setdefault(inst.triplets[0].relation, []).append(inst)
    out: list[RelationInstance] = []
    for relation in sorted(by_relation):
        target = round(factor * gold_counts.get(relation, 0))
        if target <= 0:
            continue
        pool = by_relation[relation]
        rng = random.Random(f"{seed}:{relation}")
        take = min(target, len(pool))
        out.extend(rng.sample(pool, take))
    out.sort(key=lambda inst: (inst.triplets[0].relation, inst.id))
    return out


__all__ = [
    "DROP_REASONS",
    "NO_RELATION_LABEL",
    "DropRecord",
    "default_pronouns",
    "filter_pseudo",
    "sample_per_relation",
]
