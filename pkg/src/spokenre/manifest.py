"""Shared domain types and the JSONL interchange format.

A manifest file is UTF-8, line-delimited JSON with "\n" separators and no
BOM.  The first line is a header object carrying dataset metadata::

    {"kind": "manifest", "name": ..., "relations": [...], "meta": {...}}

Every following line is one utterance::

    {"kind": "instance", "id": ..., "split": ..., "transcript": ...,
     "audio": ..., "voice": ..., "duration": ..., "hypothesis": ...,
     "source": ..., "triplets": [{"head", "relation", "tail"}, ...]}

Optional fields ("audio", "voice", "duration", "hypothesis") are omitted
when absent, never written as null.  Key order is fixed and meta keys are
sorted, so equal manifests serialize to byte-identical files and distinct
manifests to distinct files.

Entity surfaces are stored exactly as they appear in the source text; any
normalization (case folding, punctuation stripping) is an explicit
operation elsewhere, never applied at IO time.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

RESERVED_MARKERS = ("<triplet>", "<subj>", "<obj>")
SPLITS = ("train", "dev", "test")

# Sources whose instances may carry empty triplet lists or triplets with
# empty entity fields (raw generations awaiting filtering).  Everything
# else must be fully labeled.
UNVALIDATED_SOURCES = ("pseudo",)


class ManifestError(ValueError):
    """Malformed manifest file or domain invariant violation."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class Triplet:
    """One relational fact: head entity, relation label, tail entity.

    Fields must be trimmed and free of the reserved marker substrings;
    empty strings are representable so that raw pseudo-label candidates
    can be inspected, but fully-labeled sources reject them at manifest
    validation.
    """

    head: str
    relation: str
    tail: str

    def __post_init__(self):
        for name in ("head", "relation", "tail"):
            value = getattr(self, name)
            if not isinstance(value, str):
                raise ManifestError(f"triplet {name} must be a string, got {type(value).__name__}")
            if value != value.strip():
                raise ManifestError(f"triplet {name} has leading/trailing whitespace: {value!r}")
            for marker in RESERVED_MARKERS:
                if marker in value:
                    raise ManifestError(f"triplet {name} contains reserved marker {marker!r}: {value!r}")

    def as_tuple(self) -> tuple[str, str, str]:
        return (self.head, self.relation, self.tail)


@dataclass(frozen=True)
class RelationInstance:
    """One utterance: transcript, optional audio reference, labeled triplets."""

    id: str
    split: str
    transcript: str
    triplets: tuple[Triplet, ...] = ()
    audio_ref: str | None = None
    voice: str | None = None
    duration: float | None = None
    hypothesis: str | None = None
    source: str = "gold"

    def __post_init__(self):
        if not self.id or not isinstance(self.id, str):
            raise ManifestError("instance id must be a non-empty string")
        if self.split not in SPLITS:
            raise ManifestError(
                f"unknown split {self.split!r} for instance {self.id!r} (expected one of {', '.join(SPLITS)})"
            )
        if not isinstance(self.transcript, str):
            raise ManifestError(f"instance {self.id!r}: transcript must be a string")
        if not self.source or not isinstance(self.source, str):
            raise ManifestError(f"instance {self.id!r}: source must be a non-empty string")
        for name in ("audio_ref", "voice", "hypothesis"):
            value = getattr(self, name)
            if value is not None and (not isinstance(value, str) or not value):
                raise ManifestError(f"instance {self.id!r}: {name} must be a non-empty string or absent")
        if self.duration is not None:
            if not isinstance(self.duration, (int, float)) or isinstance(self.duration, bool):
                raise ManifestError(f"instance {self.id!r}: duration must be a number or absent")
            if self.duration < 0:
                raise ManifestError(f"instance {self.id!r}: duration must be non-negative")
            object.__setattr__(self, "duration", float(self.duration))
        object.__setattr__(self, "triplets", tuple(self.triplets))

    def relation_labels(self) -> frozenset[str]:
        return frozenset(t.relation for t in self.triplets)


@dataclass(frozen=True)
class Manifest:
    """A dataset: relation inventory, instances, free-form string metadata.

    Construction validates all invariants: unique instance ids, known
    splits, triplet relations covered by the inventory, and full labels
    for every source outside UNVALIDATED_SOURCES.
    """

    name: str
    relations: tuple[str, ...] = ()
    instances: tuple[RelationInstance, ...] = ()
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "relations", tuple(self.relations))
        object.__setattr__(self, "instances", tuple(self.instances))
        object.__setattr__(self, "meta", dict(self.meta))
        self._validate()

    def _validate(self):
        if not isinstance(self.name, str) or not self.name:
            raise ManifestError("manifest name must be a non-empty string")
        seen_rel = set()
        for r in self.relations:
            if not isinstance(r, str) or not r:
                raise ManifestError(f"relation labels must be non-empty strings, got {r!r}")
            if r in seen_rel:
                raise ManifestError(f"duplicate relation label {r!r} in inventory")
            seen_rel.add(r)
        for k, v in self.meta.items():
            if not isinstance(k, str) or not isinstance(v, str):
                raise ManifestError(f"meta entries must map strings to strings, got {k!r}: {v!r}")
        seen_ids = set()
        for inst in self.instances:
            if inst.id in seen_ids:
                raise ManifestError(f"duplicate instance id {inst.id!r}")
            seen_ids.add(inst.id)
            labeled = inst.source not in UNVALIDATED_SOURCES
            if labeled and not inst.triplets:
                raise ManifestError(
                    f"instance {inst.id!r} (source {inst.source!r}) has no triplets; "
                    f"empty triplet lists are reserved for sources {UNVALIDATED_SOURCES}"
                )
            for t in inst.triplets:
                if t.relation not in seen_rel:
                    raise ManifestError(
                        f"instance {inst.id!r} references unknown relation label {t.relation!r}"
                    )
                if labeled and ("" in t.as_tuple()):
                    raise ManifestError(
                        f"instance {inst.id!r} (source {inst.source!r}) has a triplet with an empty field"
                    )

    def instances_in(self, split: str) -> tuple[RelationInstance, ...]:
        if split not in SPLITS:
            raise ManifestError(f"unknown split {split!r}")
        return tuple(i for i in self.instances if i.split == split)

    def instance_by_id(self) -> dict[str, RelationInstance]:
        return {i.id: i for i in self.instances}


# --- JSONL serialization -------------------------------------------------

_HEADER_KEYS = {"kind", "name", "relations", "meta"}
_INSTANCE_KEYS = {
    "kind", "id", "split", "transcript", "audio", "voice",
    "duration", "hypothesis", "source", "triplets",
}
_TRIPLET_KEYS = {"head", "relation", "tail"}


def _header_obj(m: Manifest) -> dict:
    return {
        "kind": "manifest",
        "name": m.name,
        "relations": list(m.relations),
        "meta": {k: m.meta[k] for k in sorted(m.meta)},
    }


def _instance_obj(inst: RelationInstance) -> dict:
    obj: dict = {"kind": "instance", "id": inst.id, "split": inst.split, "transcript": inst.transcript}
    if inst.audio_ref is not None:
        obj["audio"] = inst.audio_ref
    if inst.voice is not None:
        obj["voice"] = inst.voice
    if inst.duration is not None:
        obj["duration"] = inst.duration
    if inst.hypothesis is not None:
        obj["hypothesis"] = inst.hypothesis
    obj["source"] = inst.source
    obj["triplets"] = [{"head": t.head, "relation": t.relation, "tail": t.tail} for t in inst.triplets]
    return obj


def manifest_lines(m: Manifest) -> list[str]:
    """Canonical JSONL rendering, one string per line, no terminators."""
    lines = [json.dumps(_header_obj(m), ensure_ascii=False, separators=(",", ":"))]
    lines.extend(
        json.dumps(_instance_obj(i), ensure_ascii=False, separators=(",", ":")) for i in m.instances
    )
    return lines


def write_manifest(m: Manifest, path: str | Path) -> None:
    """Write `m` atomically (temp file + rename); output is deterministic."""
    atomic_write_text(path, "\n".join(manifest_lines(m)) + "\n")


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _require_keys(obj: dict, allowed: set[str], what: str, line: int) -> None:
    extra = set(obj) - allowed
    if extra:
        raise ManifestError(f"unknown {what} keys: {', '.join(sorted(extra))}", line)


def _parse_triplet(obj, line: int) -> Triplet:
    if not isinstance(obj, dict):
        raise ManifestError(f"triplet entries must be objects, got {type(obj).__name__}", line)
    _require_keys(obj, _TRIPLET_KEYS, "triplet", line)
    missing = _TRIPLET_KEYS - set(obj)
    if missing:
        raise ManifestError(f"triplet missing keys: {', '.join(sorted(missing))}", line)
    try:
        return Triplet(obj["head"], obj["relation"], obj["tail"])
    except ManifestError as e:
        raise ManifestError(str(e), line) from None


def _parse_instance(obj: dict, line: int) -> RelationInstance:
    _require_keys(obj, _INSTANCE_KEYS, "instance", line)
    for key in ("id", "split", "transcript", "source", "triplets"):
        if key not in obj:
            raise ManifestError(f"instance missing key {key!r}", line)
    if not isinstance(obj["triplets"], list):
        raise ManifestError("instance 'triplets' must be a list", line)
    triplets = tuple(_parse_triplet(t, line) for t in obj["triplets"])
    try:
        return RelationInstance(
            id=obj["id"],
            split=obj["split"],
            transcript=obj["transcript"],
            triplets=triplets,
            audio_ref=obj.get("audio"),
            voice=obj.get("voice"),
            duration=obj.get("duration"),
            hypothesis=obj.get("hypothesis"),
            source=obj["source"],
        )
    except ManifestError as e:
        raise ManifestError(str(e), line) from None


def read_manifest(path: str | Path) -> Manifest:
    """Read and validate a JSONL manifest; errors carry 1-based line numbers."""
    path = Path(path)
    header: dict | None = None
    instances: list[RelationInstance] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            raw = raw.rstrip("\n")
            if not raw.strip():
                raise ManifestError("empty line", line_no)
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as e:
                raise ManifestError(f"malformed JSON: {e.msg}", line_no) from None
            if not isinstance(obj, dict):
                raise ManifestError("each line must be a JSON object", line_no)
            kind = obj.get("kind")
            if line_no == 1:
                if kind != "manifest":
                    raise ManifestError("first line must be the manifest header (kind='manifest')", line_no)
                _require_keys(obj, _HEADER_KEYS, "header", line_no)
                for key in ("name", "relations", "meta"):
                    if key not in obj:
                        raise ManifestError(f"header missing key {key!r}", line_no)
                if not isinstance(obj["relations"], list):
                    raise ManifestError("header 'relations' must be a list", line_no)
                if not isinstance(obj["meta"], dict):
                    raise ManifestError("header 'meta' must be an object", line_no)
                header = obj
            elif kind == "instance":
                instances.append(_parse_instance(obj, line_no))
            else:
                raise ManifestError(f"expected kind='instance', got {kind!r}", line_no)
    if header is None:
        raise ManifestError("empty file: missing manifest header", 1)
    try:
        return Manifest(
            name=header["name"],
            relations=tuple(header["relations"]),
            instances=tuple(instances),
            meta=dict(header["meta"]),
        )
    except ManifestError as e:
        raise ManifestError(f"{path.name}: {e}") from None


__all__ = [
    "RESERVED_MARKERS",
    "SPLITS",
    "UNVALIDATED_SOURCES",
    "ManifestError",
    "Triplet",
    "RelationInstance",
    "Manifest",
    "read_manifest",
    "write_manifest",
    "manifest_lines",
    "atomic_write_text",
]
