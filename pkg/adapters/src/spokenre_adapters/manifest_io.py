"""Minimal reader/writer for the shared JSONL manifest wire format.

Instances are handled as plain dicts (keys: id, split, transcript, audio,
voice, duration, hypothesis, source, triplets).  The writer emits the
canonical key order with absent optionals omitted, so adapter outputs
validate byte-for-byte under the main toolkit's reader.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

_INSTANCE_KEY_ORDER = (
    "id", "split", "transcript", "audio", "voice", "duration", "hypothesis", "source", "triplets"
)


def read_manifest(path: str | Path) -> dict:
    """Load a manifest into {"name", "relations", "meta", "instances"}."""
    instances = []
    header = None
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            obj = json.loads(raw)
            kind = obj.get("kind")
            if line_no == 1:
                if kind != "manifest":
                    raise ValueError(f"{path}: first line must be the manifest header")
                header = obj
            elif kind == "instance":
                instances.append({k: v for k, v in obj.items() if k != "kind"})
            else:
                raise ValueError(f"{path} line {line_no}: unexpected kind {kind!r}")
    if header is None:
        raise ValueError(f"{path}: empty manifest")
    return {
        "name": header["name"],
        "relations": list(header["relations"]),
        "meta": dict(header["meta"]),
        "instances": instances,
    }


def write_manifest(name: str, relations, instances, path: str | Path, meta=None) -> None:
    path = Path(path)
    lines = [
        json.dumps(
            {
                "kind": "manifest",
                "name": name,
                "relations": list(relations),
                "meta": {k: str(v) for k, v in sorted((meta or {}).items())},
            },
            ensure_ascii=False,
            separators=(",", ":"),
        )
    ]
    for inst in instances:
        obj = {"kind": "instance"}
        for key in _INSTANCE_KEY_ORDER:
            if key in ("id", "split", "transcript", "source", "triplets"):
                obj[key] = inst[key]
            elif inst.get(key) is not None:
                obj[key] = inst[key]
        lines.append(json.dumps(obj, ensure_ascii=False, separators=(",", ":")))
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def linearize(triplets) -> str:
    """Render triplet dicts in the generative target format."""
    return " ".join(
        f"<triplet> {t['head']} <subj> {t['tail']} <obj> {t['relation']}" for t in triplets
    )


__all__ = ["read_manifest", "write_manifest", "linearize"]
