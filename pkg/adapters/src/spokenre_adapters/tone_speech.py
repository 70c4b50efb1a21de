"""Deterministic tone-codec speech backends.

The "tone" TTS renders each character as a 50 ms sinusoid on a fixed
frequency grid (one exact DFT bin per character over the tone window,
so decoding is noise-free), with per-voice harmonic coloring; the "tone"
ASR inverts it by matched filtering.  Together they make the whole
synthesize -> transcribe -> relabel pipeline runnable hermetically and
reproducibly; real model backends plug in through the same two
functions (text -> waveform, waveform -> text).
"""

from __future__ import annotations

import hashlib
import wave
from pathlib import Path

import numpy as np

SAMPLE_RATE = 16000
TONE_SAMPLES = 800
GAP_SAMPLES = 200
STRIDE = TONE_SAMPLES + GAP_SAMPLES

CHAR_TABLE = "abcdefghijklmnopqrstuvwxyz0123456789 .,'-?"
BASE_HZ = 400.0
STEP_HZ = 40.0  # keeps every char frequency on an exact 20 Hz DFT bin

_FREQS = np.array([BASE_HZ + STEP_HZ * i for i in range(len(CHAR_TABLE))])
_PUNCT = set(".,'-?")


def voice_timbre(voice: str) -> tuple[float, float]:
    """Second/third harmonic amplitudes for a voice id, stable across runs."""
    digest = hashlib.sha256(voice.encode("utf-8")).digest()
    return 0.35 * digest[0] / 255.0, 0.20 * digest[1] / 255.0


def synthesize_waveform(text: str, voice: str = "v1") -> np.ndarray:
    """Render text to a float waveform; characters outside the table are skipped."""
    h2, h3 = voice_timbre(voice)
    t = np.arange(TONE_SAMPLES) / SAMPLE_RATE
    envelope = np.minimum(1.0, np.minimum(np.arange(TONE_SAMPLES), TONE_SAMPLES - np.arange(TONE_SAMPLES)) / 80.0)
    chunks = []
    for ch in text.casefold():
        idx = CHAR_TABLE.find(ch)
        if idx < 0:
            continue
        f = _FREQS[idx]
        tone = np.sin(2 * np.pi * f * t) + h2 * np.sin(4 * np.pi * f * t) + h3 * np.sin(6 * np.pi * f * t)
        peak = 1.0 + h2 + h3
        chunks.append(tone * envelope * (0.8 / peak))
        chunks.append(np.zeros(GAP_SAMPLES))
    if not chunks:
        return np.zeros(STRIDE)
    return np.concatenate(chunks)


def decode_waveform(samples: np.ndarray) -> str:
    """Matched-filter decode of a tone-codec waveform back to text."""
    t = np.arange(TONE_SAMPLES) / SAMPLE_RATE
    bank = np.exp(-2j * np.pi * _FREQS[:, None] * t[None, :])
    out = []
    for start in range(0, len(samples) - TONE_SAMPLES + 1, STRIDE):
        frame = samples[start:start + TONE_SAMPLES]
        if np.sqrt(np.mean(frame**2)) < 1e-3:
            continue
        power = np.abs(bank @ frame)
        out.append(CHAR_TABLE[int(np.argmax(power))])
    return "".join(out)


def asr_transcript(samples: np.ndarray) -> str:
    """Raw recognizer output style: lowercase, punctuation dropped."""
    decoded = decode_waveform(samples)
    return " ".join("".join(ch for ch in decoded if ch not in _PUNCT).split())


def restore_text(raw: str) -> str:
    """Naive punctuation/casing restoration: sentence-initial capitals, a
    terminal full stop, and the pronoun I.  Entity casing stays lost,
    like a real restoration model downstream of a lowercasing ASR."""
    words = raw.split()
    if not words:
        return ""
    restored = []
    for i, word in enumerate(words):
        if i == 0:
            word = word[:1].upper() + word[1:]
        elif word == "i":
            word = "I"
        restored.append(word)
    text = " ".join(restored)
    return text if text.endswith(".") else text + "."


def write_wav(path: str | Path, samples: np.ndarray) -> None:
    """16 kHz mono 16-bit PCM."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    scaled = np.clip(samples, -1.0, 1.0)
    pcm = (scaled * 32000).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(SAMPLE_RATE)
        fh.writeframes(pcm.tobytes())


def read_wav(path: str | Path) -> np.ndarray:
    try:
        with wave.open(str(path), "rb") as fh:
            if fh.getnchannels() != 1 or fh.getsampwidth() != 2 or fh.getframerate() != SAMPLE_RATE:
                raise ValueError(f"{path}: expected {SAMPLE_RATE} Hz mono 16-bit PCM")
            pcm = np.frombuffer(fh.readframes(fh.getnframes()), dtype="<i2")
    except (wave.Error, EOFError) as e:
        raise ValueError(f"{path}: not a readable wav file ({e})") from None
    return pcm.astype(np.float64) / 32000.0


def duration_seconds(samples: np.ndarray) -> float:
    return len(samples) / SAMPLE_RATE


TTS_BACKENDS = {"tone": synthesize_waveform}
ASR_BACKENDS = {"tone": asr_transcript}


__all__ = [
    "SAMPLE_RATE",
    "CHAR_TABLE",
    "TTS_BACKENDS",
    "ASR_BACKENDS",
    "synthesize_waveform",
    "decode_waveform",
    "asr_transcript",
    "restore_text",
    "write_wav",
    "read_wav",
    "duration_seconds",
    "voice_timbre",
]
