"""TTS adapter: render manifest transcripts to wav files.

Single-voice mode synthesizes audio for every instance in place; upsample
mode keeps the originals and adds one re-voiced train-split copy per
voice (id "<orig>#<voice>", audio at "<voice>/<orig>.wav"), matching the
paths the toolkit's upsampling planner emits.  Per-instance synthesis
failures are logged, counted in manifest meta, and skipped.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .jobs import AdapterJob, load_config
from .manifest_io import read_manifest, write_manifest
from .tone_speech import TTS_BACKENDS, duration_seconds, write_wav

log = logging.getLogger("spokenre_adapters.synthesize")


def synthesize(job: AdapterJob, voices: list[str], audio_root: str, upsample: bool = False) -> dict:
    if not voices:
        raise ValueError("need at least one voice")
    if len(set(voices)) != len(voices):
        raise ValueError("duplicate voice ids")
    backend = TTS_BACKENDS.get(job.model)
    if backend is None:
        raise ValueError(f"unknown TTS backend {job.model!r}; known: {', '.join(sorted(TTS_BACKENDS))}")
    source = read_manifest(job.input_manifest)
    root = Path(audio_root)
    out_instances = []
    failures = 0

    def render(inst, voice, new_id=None):
        nonlocal failures
        text = inst["transcript"]
        if not text.strip():
            failures += 1
            log.warning("skipping %s: empty transcript", inst["id"])
            return None
        samples = backend(text, voice)
        # audio paths keep the original utterance id, matching the paths
        # the toolkit's upsampling planner writes into manifests
        rel_path = f"{voice}/{inst['id']}.wav"
        write_wav(root / rel_path, samples)
        return {
            **inst,
            "id": new_id or inst["id"],
            "audio": rel_path,
            "voice": voice,
            "duration": duration_seconds(samples),
        }

    if upsample:
        out_instances.extend(source["instances"])
        for voice in voices:
            for inst in source["instances"]:
                if inst["split"] != "train":
                    continue
                rendered = render({**inst, "source": "tts"}, voice, new_id=f"{inst['id']}#{voice}")
                if rendered is not None:
                    out_instances.append(rendered)
    else:
        voice = voices[0]
        for inst in source["instances"]:
            rendered = render(inst, voice)
            if rendered is not None:
                out_instances.append(rendered)

    meta = dict(source["meta"])
    meta["tts_backend"] = job.model
    meta["tts_voices"] = ",".join(voices)
    meta["tts_failures"] = str(failures)
    write_manifest(source["name"], source["relations"], out_instances, job.output_manifest, meta)
    return {"instances": len(out_instances), "failures": failures}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="synthesize manifest transcripts to wav files")
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--out-manifest", required=True)
    parser.add_argument("--audio-root", required=True)
    parser.add_argument("--voices", required=True, help="comma-separated voice ids")
    parser.add_argument("--upsample", action="store_true", help="add re-voiced train copies instead of voicing in place")
    parser.add_argument("--config", default=None, help="JSON config naming model backends")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(message)s")
    config = load_config(args.config)
    job = AdapterJob(args.manifest, args.out_manifest, model=config["tts_backend"])
    result = synthesize(job, [v for v in args.voices.split(",") if v], args.audio_root, args.upsample)
    print(f"wrote {args.out_manifest}: {result['instances']} instances, {result['failures']} failures")
    return 0


if __name__ == "__main__":
    sys.exit(main())
