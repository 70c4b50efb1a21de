"""Pseudo-labeling adapter: run a relation extractor over an unlabeled
ASR-style corpus and emit single-triplet pseudo instances.

Sentences are normalized the way the corpus prep does (whitespace
collapsed, a terminal full stop added, original casing kept) before
extraction.  The bundled "pattern" backend is a deterministic stand-in
for a fine-tuned generative extractor: a small cue-phrase grammar that,
like the real model, happily produces no_relation labels, pronoun
arguments, and relations outside any particular inventory; the toolkit's
filter is what cleans them up.  A sentence with no extraction emits no
instance.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys

from .jobs import AdapterJob, load_config
from .manifest_io import read_manifest, write_manifest

log = logging.getLogger("spokenre_adapters.pseudo_label")

_NAME = r"[A-Z][A-Za-z'.-]*(?: [A-Z][A-Za-z'.-]*)*"

# Ordered cue-phrase grammar; the first match wins so each sentence yields
# at most one triplet.
PATTERNS = (
    (re.compile(rf"(?P<head>{_NAME}) (?:became|was named|is) (?:the )?(?P<tail>president|chairman|director|author|journalist|writer|editor)\b"), "per:title"),
    (re.compile(rf"(?P<head>{_NAME}) is an? (?P<tail>[A-Z][a-z]+) (?:author|journalist|writer|national)\b"), "per:origin"),
    (re.compile(rf"(?P<head>{_NAME}) (?:joined|works for|works at) (?P<tail>{_NAME})"), "org:member"),
    (re.compile(rf"(?P<head>{_NAME})(?: region| area)? contains (?P<tail>{_NAME})"), "loc:contains"),
    (re.compile(r"(?P<head>[A-Za-z]+) married (?P<tail>[A-Za-z]+)\b"), "per:spouse"),
    (re.compile(rf"(?P<head>{_NAME}) (?:met|saw) (?P<tail>{_NAME})"), "no_relation"),
)


def normalize_sentence(text: str) -> str:
    """Collapse whitespace and guarantee a terminal full stop; case is kept."""
    text = " ".join(text.split())
    if text and text[-1] not in ".!?":
        text += "."
    return text


def extract(text: str) -> dict | None:
    for pattern, relation in PATTERNS:
        m = pattern.search(text)
        if m:
            return {
                "head": m.group("head").strip(" .,'-"),
                "relation": relation,
                "tail": m.group("tail").strip(" .,'-"),
            }
    return None


def pseudo_label(job: AdapterJob) -> dict:
    if job.model != "pattern":
        raise ValueError(f"unknown extractor backend {job.model!r}; known: pattern")
    source = read_manifest(job.input_manifest)
    out_instances = []
    relations = set()
    failures = 0
    for inst in source["instances"]:
        text = normalize_sentence(inst["transcript"])
        if not text:
            failures += 1
            log.warning("skipping %s: empty transcript", inst["id"])
            continue
        triplet = extract(text)
        if triplet is None:
            continue
        relations.add(triplet["relation"])
        out_instances.append(
            {
                **inst,
                "transcript": text,
                "source": "pseudo",
                "triplets": [triplet],
            }
        )
    meta = dict(source["meta"])
    meta["extractor_backend"] = job.model
    meta["extractor_failures"] = str(failures)
    write_manifest(
        f"{source['name']}-pseudo", sorted(relations), out_instances, job.output_manifest, meta
    )
    return {"instances": len(out_instances), "failures": failures}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="pseudo-label an unlabeled ASR corpus manifest")
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--out-manifest", required=True)
    parser.add_argument("--config", default=None)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(message)s")
    config = load_config(args.config)
    job = AdapterJob(args.manifest, args.out_manifest, model=config["extractor_backend"])
    result = pseudo_label(job)
    print(f"wrote {args.out_manifest}: {result['instances']} pseudo instances")
    return 0


if __name__ == "__main__":
    sys.exit(main())
