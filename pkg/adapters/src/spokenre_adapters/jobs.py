"""Adapter job descriptions and backend configuration.

Model identifiers live in a JSON config file, not in code, so the bundled
deterministic reference backends can be swapped for real checkpoints
without touching the adapters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

DEFAULT_CONFIG = {
    # Reference backends; replace with real checkpoint ids, e.g. a
    # Tacotron2 TTS or a wav2vec2 ASR checkpoint, once a backend wrapping
    # them is registered.
    "tts_backend": "tone",
    "asr_backend": "tone",
    "extractor_backend": "pattern",
}


@dataclass(frozen=True)
class AdapterJob:
    """One adapter invocation: where to read, where to write, which model."""

    input_manifest: str
    output_manifest: str
    model: str
    device: str = "cpu"
    batch_size: int = 8

    def __post_init__(self):
        if Path(self.input_manifest).resolve() == Path(self.output_manifest).resolve():
            raise ValueError("output manifest must differ from input manifest")
        if self.batch_size < 1:
            raise ValueError("batch size must be positive")


def load_config(path: str | None) -> dict:
    config = dict(DEFAULT_CONFIG)
    if path:
        with open(path, encoding="utf-8") as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(DEFAULT_CONFIG)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        config.update(loaded)
    return config


__all__ = ["AdapterJob", "DEFAULT_CONFIG", "load_config"]
