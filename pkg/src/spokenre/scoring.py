"""Micro precision/recall/F1 at three facets: entities, relations, triplets.

Entity scoring is span-free (surface strings only), relation scoring
ignores entities entirely (sentence-level relation classification), and
triplet scoring requires head, relation, and tail to all match with head
and tail as distinct roles.  Per instance, gold and predictions are
reduced to SETS before counting, so a generation that repeats a triplet
earns credit once.  All scores are exact rationals over integer counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .codec import NormalizationPolicy, normalize_surface
from .manifest import Manifest, RelationInstance, Triplet

# Case and punctuation differences count as mismatches by default; entity
# matching failures caused by them are part of what is being measured.
STRICT_POLICY = NormalizationPolicy(casefold=False, strip_punct=False, collapse_ws=True)
RELAXED_POLICY = NormalizationPolicy(casefold=True, strip_punct=True, collapse_ws=True)

Predictions = Mapping[str, Sequence[Triplet]]


@dataclass(frozen=True)
class FacetScore:
    tp: int
    pred_total: int
    gold_total: int

    def __post_init__(self):
        if min(self.tp, self.pred_total, self.gold_total) < 0:
            raise ValueError("facet counts must be non-negative")
        if self.tp > min(self.pred_total, self.gold_total):
            raise ValueError("tp cannot exceed either total")

    @property
    def precision(self) -> Fraction:
        return Fraction(self.tp, self.pred_total) if self.pred_total else Fraction(0)

    @property
    def recall(self) -> Fraction:
        return Fraction(self.tp, self.gold_total) if self.gold_total else Fraction(0)

    @property
    def f1(self) -> Fraction:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else Fraction(0)

    def as_dict(self) -> dict:
        return {
            "tp": self.tp,
            "pred_total": self.pred_total,
            "gold_total": self.gold_total,
            "precision": float(self.precision),
            "recall": float(self.recall),
            "f1": float(self.f1),
        }


@dataclass(frozen=True)
class EvalReport:
    entity: FacetScore
    relation: FacetScore
    triplet: FacetScore
    per_relation: dict[str, FacetScore]
    n_instances: int
    policy: NormalizationPolicy
    unknown_relations: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "n_instances": self.n_instances,
            "policy": {
                "casefold": self.policy.casefold,
                "strip_punct": self.policy.strip_punct,
                "collapse_ws": self.policy.collapse_ws,
            },
            "entity": self.entity.as_dict(),
            "relation": self.relation.as_dict(),
            "triplet": self.triplet.as_dict(),
            "per_relation": {r: self.per_relation[r].as_dict() for r in sorted(self.per_relation)},
            "unknown_relations": list(self.unknown_relations),
        }


def _check_ids(gold_ids: set[str], predictions: Predictions) -> None:
    extra = set(predictions) - gold_ids
    if extra:
        raise KeyError(f"prediction ids not present in gold: {', '.join(sorted(extra))}")


def _entity_set(triplets: Iterable[Triplet], policy: NormalizationPolicy) -> set[str]:
    out: set[str] = set()
    for t in triplets:
        out.add(normalize_surface(t.head, policy))
        out.add(normalize_surface(t.tail, policy))
    return out


def _relation_set(triplets: Iterable[Triplet]) -> set[str]:
    return {t.relation for t in triplets}


def _triplet_set(triplets: Iterable[Triplet], policy: NormalizationPolicy) -> set[tuple[str, str, str]]:
    return {
        (normalize_surface(t.head, policy), t.relation, normalize_surface(t.tail, policy))
        for t in triplets
    }


def _accumulate(gold, predictions, policy, reduce) -> FacetScore:
    tp = pred_total = gold_total = 0
    for inst in gold:
        gold_set = reduce(inst.triplets, policy)
        pred_set = reduce(predictions.get(inst.id, ()), policy)
        tp += len(gold_set & pred_set)
        pred_total += len(pred_set)
        gold_total += len(gold_set)
    return FacetScore(tp, pred_total, gold_total)


def score_entities(
    gold: Iterable[RelationInstance], predictions: Predictions, policy: NormalizationPolicy = STRICT_POLICY
) -> FacetScore:
    """Span-free entity micro scores: per-instance sets of normalized head/tail surfaces."""
    gold = list(gold)
    _check_ids({i.id for i in gold}, predictions)
    return _accumulate(gold, predictions, policy, _entity_set)


def score_relations(
    gold: Iterable[RelationInstance], predictions: Predictions, policy: NormalizationPolicy = STRICT_POLICY
) -> FacetScore:
    """Relation-label micro scores; entities are ignored entirely."""
    gold = list(gold)
    _check_ids({i.id for i in gold}, predictions)
    return _accumulate(gold, predictions, policy, lambda ts, _p: _relation_set(ts))


def score_triplets(
    gold: Iterable[RelationInstance], predictions: Predictions, policy: NormalizationPolicy = STRICT_POLICY
) -> FacetScore:
    """Full-triplet micro scores: normalized (head, relation, tail) with exact equality."""
    gold = list(gold)
    _check_ids({i.id for i in gold}, predictions)
    return _accumulate(gold, predictions, policy, _triplet_set)


def evaluate_corpus(
    gold: Manifest,
    predictions: Predictions,
    policy: NormalizationPolicy = STRICT_POLICY,
    split: str | None = None,
) -> EvalReport:
    """Score predictions against a manifest (one split, or all when None).

    Prediction ids must exist in the manifest; gold instances without a
    prediction are scored against the empty set, so missing outputs cost
    recall.  The per-relation breakdown restricts the triplet facet to
    each inventory relation; predicted labels outside the inventory are
    reported in unknown_relations (they can never match).
    """
    _check_ids({i.id for i in gold.instances}, predictions)
    instances = list(gold.instances if split is None else gold.instances_in(split))
    chosen_ids = {i.id for i in instances}
    predictions = {k: v for k, v in predictions.items() if k in chosen_ids}

    per_relation: dict[str, FacetScore] = {}
    for r in gold.relations:
        reduce = lambda ts, p, _r=r: {t for t in _triplet_set(ts, p) if t[1] == _r}
        per_relation[r] = _accumulate(instances, predictions, policy, reduce)

    unknown = sorted(
        {t.relation for ts in predictions.values() for t in ts} - set(gold.relations)
    )
    return EvalReport(
        entity=_accumulate(instances, predictions, policy, _entity_set),
        relation=_accumulate(instances, predictions, policy, lambda ts, _p: _relation_set(ts)),
        triplet=_accumulate(instances, predictions, policy, _triplet_set),
        per_relation=per_relation,
        n_instances=len(instances),
        policy=policy,
        unknown_relations=tuple(unknown),
    )


__all__ = [
    "STRICT_POLICY",
    "RELAXED_POLICY",
    "FacetScore",
    "EvalReport",
    "score_entities",
    "score_relations",
    "score_triplets",
    "evaluate_corpus",
]
