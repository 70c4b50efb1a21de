"""ASR adapter: transcribe manifest audio into per-instance hypotheses.

The recognizer output is post-processed with the naive casing/full-stop
restorer, mirroring a lowercasing ASR followed by a restoration model;
the gold transcript is left untouched so the hypothesis can be scored
and used for entity relabeling downstream.  Unreadable audio is logged,
counted, and skipped.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .jobs import AdapterJob, load_config
from .manifest_io import read_manifest, write_manifest
from .tone_speech import ASR_BACKENDS, read_wav, restore_text

log = logging.getLogger("spokenre_adapters.transcribe")


def transcribe(job: AdapterJob, audio_root: str) -> dict:
    backend = ASR_BACKENDS.get(job.model)
    if backend is None:
        raise ValueError(f"unknown ASR backend {job.model!r}; known: {', '.join(sorted(ASR_BACKENDS))}")
    source = read_manifest(job.input_manifest)
    root = Path(audio_root)
    out_instances = []
    failures = 0
    for inst in source["instances"]:
        if not inst.get("audio"):
            failures += 1
            log.warning("skipping %s: no audio reference", inst["id"])
            out_instances.append(inst)
            continue
        try:
            samples = read_wav(root / inst["audio"])
        except (OSError, ValueError) as e:
            failures += 1
            log.warning("skipping %s: %s", inst["id"], e)
            out_instances.append(inst)
            continue
        hypothesis = restore_text(backend(samples))
        out_instances.append({**inst, "hypothesis": hypothesis} if hypothesis else inst)
    meta = dict(source["meta"])
    meta["asr_backend"] = job.model
    meta["asr_failures"] = str(failures)
    write_manifest(source["name"], source["relations"], out_instances, job.output_manifest, meta)
    return {"instances": len(out_instances), "failures": failures}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="transcribe manifest audio into hypothesis fields")
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--out-manifest", required=True)
    parser.add_argument("--audio-root", required=True)
    parser.add_argument("--config", default=None)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(message)s")
    config = load_config(args.config)
    job = AdapterJob(args.manifest, args.out_manifest, model=config["asr_backend"])
    result = transcribe(job, args.audio_root)
    print(f"wrote {args.out_manifest}: {result['instances']} instances, {result['failures']} failures")
    return 0


if __name__ == "__main__":
    sys.exit(main())
