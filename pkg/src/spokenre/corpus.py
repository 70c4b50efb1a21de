"""Manifest construction and corpus transformations.

Builds manifests from text-RE style records (preserving the source split),
derives top-k relation subsets, computes dataset statistics, plans
multi-voice upsampling of the train split, and selects human-read test
subsets.  All sampling is reproducible under a fixed seed.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .manifest import Manifest, ManifestError, RelationInstance, SPLITS, Triplet

log = logging.getLogger(__name__)

# Instances carrying this label, or no triplets at all, are removed when
# deriving relation subsets; the label can never be selected.
DEFAULT_EXCLUDED_RELATIONS = frozenset({"no_relation"})

VOICE_ID_DELIMITER = "#"


@dataclass(frozen=True)
class DatasetStats:
    """Aggregate statistics over one manifest."""

    instances: dict[str, int]
    triplets: dict[str, int]
    avg_tokens: float
    avg_audio_seconds: float | None
    relation_counts: dict[str, int]

    def as_dict(self) -> dict:
        out: dict = {
            "instances": dict(self.instances),
            "triplets": dict(self.triplets),
            "avg_tokens": self.avg_tokens,
            "relation_counts": {r: self.relation_counts[r] for r in sorted(self.relation_counts)},
        }
        if self.avg_audio_seconds is not None:
            out["avg_audio_seconds"] = self.avg_audio_seconds
        return out


Record = tuple[str, str, str, Sequence]


def _coerce_triplet(raw) -> Triplet:
    if isinstance(raw, Triplet):
        return raw
    head, relation, tail = raw
    return Triplet(head, relation, tail)


def build_manifest(
    name: str,
    records: Iterable[Record],
    audio_dir: str | Path | None = None,
    source: str = "gold",
) -> Manifest:
    """Build a manifest from (id, split, transcript, triplets) records.

    The split partition mirrors the records exactly and the relation
    inventory is inferred (sorted).  With audio_dir, every instance gets
    audio_ref "<audio_dir>/<id>.wav"; missing files are logged and counted
    in meta, not errors.
    """
    instances: list[RelationInstance] = []
    seen: set[str] = set()
    missing_audio = 0
    for rec_id, split, transcript, triplets in records:
        if rec_id in seen:
            raise ManifestError(f"duplicate record id {rec_id!r}")
        seen.add(rec_id)
        if not transcript or not transcript.strip():
            raise ManifestError(f"record {rec_id!r} has an empty transcript")
        audio_ref = None
        if audio_dir is not None:
            audio_ref = f"{Path(audio_dir).as_posix()}/{rec_id}.wav"
            if not Path(audio_ref).exists():
                missing_audio += 1
                log.warning("audio file missing for record %s: %s", rec_id, audio_ref)
        instances.append(
            RelationInstance(
                id=rec_id,
                split=split,
                transcript=transcript,
                triplets=tuple(_coerce_triplet(t) for t in triplets),
                audio_ref=audio_ref,
                source=source,
            )
        )
    relations = sorted({t.relation for inst in instances for t in inst.triplets})
    meta = {"missing_audio": str(missing_audio)} if missing_audio else {}
    return Manifest(name=name, relations=tuple(relations), instances=tuple(instances), meta=meta)


def relation_instance_counts(m: Manifest, splits: Iterable[str] | None = None) -> dict[str, int]:
    """Number of instances containing each inventory relation.

    An instance with several triplets of one relation counts once; counts
    cover all splits unless restricted.
    """
    wanted = set(SPLITS if splits is None else splits)
    counts = {r: 0 for r in m.relations}
    for inst in m.instances:
        if inst.split not in wanted:
            continue
        for r in inst.relation_labels():
            counts[r] += 1
    return counts


def subset_top_k_relations(
    m: Manifest,
    k: int,
    exclude_relations: frozenset[str] = DEFAULT_EXCLUDED_RELATIONS,
) -> Manifest:
    """Keep the k most frequent relations and only the instances fully inside them.

    Frequency is the instance count across all splits; ties resolve to the
    lexicographically smaller label.  Instances with zero triplets, an
    excluded relation, or any triplet outside the kept set are removed;
    surviving instances are untouched.
    """
    if k < 1:
        raise ManifestError("k must be positive")
    counts = relation_instance_counts(m)
    candidates = [r for r in m.relations if r not in exclude_relations]
    if len(candidates) < k:
        raise ManifestError(f"manifest has {len(candidates)} selectable relations, need {k}")
    ranked = sorted(candidates, key=lambda r: (-counts[r], r))
    kept_relations = tuple(ranked[:k])
    kept_set = set(kept_relations)
    kept_instances = tuple(
        inst
        for inst in m.instances
        if inst.triplets and all(t.relation in kept_set for t in inst.triplets)
    )
    meta = dict(m.meta)
    meta["subset_top_k"] = str(k)
    return Manifest(name=m.name, relations=kept_relations, instances=kept_instances, meta=meta)


def compute_stats(m: Manifest) -> DatasetStats:
    """Per-split instance/triplet counts, mean whitespace-token count, and
    mean audio duration over the instances that carry one."""
    instances = {s: 0 for s in SPLITS}
    triplets = {s: 0 for s in SPLITS}
    token_total = 0
    durations: list[float] = []
    for inst in m.instances:
        instances[inst.split] += 1
        triplets[inst.split] += len(inst.triplets)
        token_total += len(inst.transcript.split())
        if inst.duration is not None:
            durations.append(inst.duration)
    n = len(m.instances)
    return DatasetStats(
        instances=instances,
        triplets=triplets,
        avg_tokens=token_total / n if n else 0.0,
        avg_audio_seconds=sum(durations) / len(durations) if durations else None,
        relation_counts=relation_instance_counts(m),
    )


def plan_upsampling(m: Manifest, voices: Sequence[str]) -> Manifest:
    """Extend the train split with one re-voiced copy per (instance, voice).

    Copies get id "<orig>#<voice>", source "tts", and a voice-specific
    audio path "<voice>/<orig>.wav" for the synthesizer to fill in.
    Original instances are preserved verbatim; dev/test are untouched.
    The input must be fully labeled (filter raw pseudo candidates first),
    since the synthetic copies are ordinary training instances.
    """
    seen_voices = set()
    for v in voices:
        if not v:
            raise ManifestError("voice ids must be non-empty")
        if VOICE_ID_DELIMITER in v:
            raise ManifestError(f"voice id {v!r} contains reserved delimiter {VOICE_ID_DELIMITER!r}")
        if v in seen_voices:
            raise ManifestError(f"duplicate voice id {v!r}")
        seen_voices.add(v)
    if not voices:
        return m
    extra: list[RelationInstance] = []
    for v in voices:
        for inst in m.instances:
            if inst.split != "train":
                continue
            extra.append(
                replace(
                    inst,
                    id=f"{inst.id}{VOICE_ID_DELIMITER}{v}",
                    voice=v,
                    audio_ref=f"{v}/{inst.id}.wav",
                    duration=None,
                    source="tts",
                )
            )
    meta = dict(m.meta)
    meta["upsample_voices"] = ",".join(voices)
    return Manifest(name=m.name, relations=m.relations, instances=m.instances + tuple(extra), meta=meta)


def select_human_subset(
    m: Manifest,
    n: int | None = None,
    *,
    per_relation: int | None = None,
    seed: int = 0,
) -> Manifest:
    """Sample a test subset for human re-reading, marked source=human-pending.

    Either uniform (`n` instances) or stratified (`per_relation` instances
    containing each inventory relation, instances never reused across
    relations).  Deterministic under a fixed seed; selected instances keep
    their original order.
    """
    if (n is None) == (per_relation is None):
        raise ManifestError("specify exactly one of n or per_relation")
    test = list(m.instances_in("test"))
    rng = random.Random(seed)
    if n is not None:
        if n > len(test):
            raise ManifestError(f"test split has {len(test)} instances, need {n}")
        chosen = {test[i].id for i in rng.sample(range(len(test)), n)}
    else:
        if per_relation < 1:
            raise ManifestError("per_relation must be positive")
        chosen = set()
        for r in m.relations:
            pool = [i.id for i in test if r in i.relation_labels() and i.id not in chosen]
            if len(pool) < per_relation:
                raise ManifestError(
                    f"relation {r!r} has only {len(pool)} unused test instances, need {per_relation}"
                )
            chosen.update(rng.sample(pool, per_relation))
    selected = tuple(
        replace(inst, source="human-pending") for inst in test if inst.id in chosen
    )
    meta = dict(m.meta)
    meta["human_subset_seed"] = str(seed)
    meta["human_subset_mode"] = "uniform" if n is not None else f"stratified:{per_relation}"
    return Manifest(name=f"{m.name}-human", relations=m.relations, instances=selected, meta=meta)


__all__ = [
    "DEFAULT_EXCLUDED_RELATIONS",
    "VOICE_ID_DELIMITER",
    "DatasetStats",
    "build_manifest",
    "relation_instance_counts",
    "subset_top_k_relations",
    "compute_stats",
    "plan_upsampling",
    "select_human_subset",
]
