import numpy as np
import pytest

from spokenre_adapters import tone_speech as ts


def test_codec_round_trip_across_voices():
    text = "the khost region contains miran shah, said ahmed rashid in 2001."
    for voice in ("v1", "v2", "narrator", "reader-04"):
        wave = ts.synthesize_waveform(text, voice)
        assert ts.decode_waveform(wave) == text


def test_asr_output_is_lowercase_without_punctuation():
    wave = ts.synthesize_waveform("Sara Khan became president of Acme Labs.", "v1")
    assert ts.asr_transcript(wave) == "sara khan became president of acme labs"


def test_restore_text():
    assert ts.restore_text("sara khan spoke") == "Sara khan spoke."
    assert ts.restore_text("then i left") == "Then I left."
    assert ts.restore_text("") == ""


def test_silence_decodes_to_empty():
    assert ts.asr_transcript(np.zeros(ts.SAMPLE_RATE)) == ""


def test_unknown_characters_skipped():
    wave = ts.synthesize_waveform("good [sic] day", "v1")
    assert ts.decode_waveform(wave) == "good sic day"


def test_wav_io_round_trip(tmp_path):
    wave = ts.synthesize_waveform("audio check", "v1")
    path = tmp_path / "x.wav"
    ts.write_wav(path, wave)
    back = ts.read_wav(path)
    assert len(back) == len(wave)
    assert np.max(np.abs(back - wave)) < 1e-3
    assert ts.decode_waveform(back) == "audio check"


def test_read_wav_rejects_other_formats(tmp_path):
    import wave as wave_mod

    path = tmp_path / "stereo.wav"
    with wave_mod.open(str(path), "wb") as fh:
        fh.setnchannels(2)
        fh.setsampwidth(2)
        fh.setframerate(ts.SAMPLE_RATE)
        fh.writeframes(b"\x00\x00" * 64)
    with pytest.raises(ValueError):
        ts.read_wav(path)


def test_voice_timbre_is_stable():
    assert ts.voice_timbre("v1") == ts.voice_timbre("v1")
    assert ts.voice_timbre("v1") != ts.voice_timbre("v2")
