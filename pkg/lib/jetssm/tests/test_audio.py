import numpy as np
import pytest
import soundfile as sf

from jetssm.audio import (
    AudioClip,
    StreamingFeaturizer,
    align_to_timeline,
    featurize,
    hz_to_mel,
    iter_wav_blocks,
    mel_center_frequencies,
    mel_filterbank,
    mel_spectrogram,
    read_wav,
    write_wav,
)
from jetssm.audio.mel import LOG_FLOOR, adaptive_hop
from jetssm.data.synth import alias_frequency
from jetssm.errors import InvalidArgumentError, UnsupportedFormatError

RATE = 38_400


def tone(freq, seconds=1.0, amplitude=0.5, rate=RATE):
    t = np.arange(int(seconds * rate)) / rate
    return AudioClip(amplitude * np.sin(2 * np.pi * freq * t), rate)


def noise(n, seed=0):
    return AudioClip(np.random.default_rng(seed).uniform(-0.5, 0.5, n), RATE)


def test_silent_file_reads_as_zeros(tmp_path):
    path = tmp_path / "silence.wav"
    sf.write(path, np.zeros(RATE, dtype=np.int16), RATE, subtype="PCM_16")
    clip = read_wav(path)
    assert clip.sample_rate == RATE
    assert clip.samples.shape == (RATE,)
    assert not clip.samples.any()


def test_int16_scaling(tmp_path):
    path = tmp_path / "scale.wav"
    sf.write(path, np.array([32767, 0, -32768], dtype=np.int16), RATE, subtype="PCM_16")
    assert read_wav(path).samples.tolist() == pytest.approx([32767 / 32768, 0.0, -1.0], abs=1e-12)


def test_stereo_is_downmixed(tmp_path):
    path = tmp_path / "stereo.wav"
    data = np.stack([np.full(100, 0.5), np.full(100, -0.25)], axis=1).astype(np.float32)
    sf.write(path, data, RATE, subtype="FLOAT")
    assert read_wav(path).samples == pytest.approx(np.full(100, 0.125))


@pytest.mark.parametrize("subtype,bits", [("PCM_16", 16), ("PCM_24", 24), ("PCM_32", 32)])
def test_write_read_round_trip_within_one_lsb(tmp_path, subtype, bits):
    clip = tone(440.0, seconds=0.25, amplitude=0.9)
    path = tmp_path / f"{subtype}.wav"
    write_wav(path, clip, subtype=subtype)
    back = read_wav(path)
    assert back.sample_rate == RATE
    assert np.abs(back.samples - clip.samples).max() <= 2.0 ** -(bits - 1)


def test_missing_and_unsupported_files(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_wav(tmp_path / "absent.wav")
    flac = tmp_path / "clip.flac"
    sf.write(flac, np.zeros(1000), RATE, format="FLAC", subtype="PCM_16")
    with pytest.raises(UnsupportedFormatError, match="FLAC"):
        read_wav(flac)
    junk = tmp_path / "junk.wav"
    junk.write_bytes(b"not a riff file at all")
    with pytest.raises(UnsupportedFormatError):
        read_wav(junk)
    with pytest.raises(UnsupportedFormatError):
        write_wav(tmp_path / "x.wav", tone(100.0), subtype="ULAW")


def test_mel_scale_anchor():
    assert hz_to_mel(0.0) == 0.0
    assert hz_to_mel(1000.0) == pytest.approx(2595 * np.log10(1 + 1000 / 700), abs=1e-9)
    assert hz_to_mel(1000.0) == pytest.approx(999.985, abs=1e-3)


def test_filterbank_geometry():
    fb = mel_filterbank(1024, RATE, 60)
    assert fb.shape == (60, 513)
    assert (fb >= 0).all()
    assert (fb.sum(axis=1) > 0).all()
    assert (np.diff(mel_center_frequencies(60, sample_rate=RATE)) > 0).all()


@pytest.mark.parametrize("fmin,fmax", [(-1.0, 8000.0), (5000.0, 4000.0), (0.0, 20_000.0)])
def test_filterbank_rejects_bad_bounds(fmin, fmax):
    with pytest.raises(InvalidArgumentError):
        mel_filterbank(1024, RATE, 60, fmin=fmin, fmax=fmax)


def test_silence_sits_on_the_log_floor():
    spec = mel_spectrogram(AudioClip(np.zeros(RATE), RATE))
    assert spec.frames.shape[1] == 60
    assert np.allclose(spec.frames, np.log(LOG_FLOOR), rtol=0, atol=1e-12)


def test_frame_count_and_hop():
    n = 20_000
    spec = mel_spectrogram(noise(n), hop=300)
    assert spec.n_frames == 1 + (n - 1024) // 300
    assert spec.hop_seconds == pytest.approx(300 / RATE)
    assert adaptive_hop(19 * RATE, 1150) == 19 * RATE // 1151
    assert adaptive_hop(5000, 1150) == 64


def test_short_clip_is_rejected():
    with pytest.raises(InvalidArgumentError, match="shorter than one window"):
        mel_spectrogram(AudioClip(np.zeros(1000), RATE))
    with pytest.raises(InvalidArgumentError, match="shorter than one window"):
        featurize(AudioClip(np.zeros(0), RATE))


@pytest.mark.parametrize("freq", [5_000.0, alias_frequency(22_170.0, RATE)])
def test_tone_lands_in_nearest_mel_bin(freq):
    spec = mel_spectrogram(tone(freq))
    nearest = int(np.argmin(np.abs(mel_center_frequencies(60, sample_rate=RATE) - freq)))
    assert int(np.argmax(spec.frames.mean(axis=0))) == nearest


def test_sonotrode_alias():
    assert alias_frequency(22_170.0, RATE) == pytest.approx(16_230.0)


def test_louder_is_never_quieter():
    clip = noise(8000, seed=1)
    quiet = mel_spectrogram(clip, hop=256).frames
    loud = mel_spectrogram(AudioClip(3.0 * clip.samples, RATE), hop=256).frames
    assert (loud >= quiet).all()


def test_shift_by_one_hop_shifts_frames():
    clip = noise(12_000, seed=2)
    base = mel_spectrogram(clip, hop=256).frames
    shifted = mel_spectrogram(AudioClip(clip.samples[256:], RATE), hop=256).frames
    assert np.abs(shifted[1:-1] - base[2 : shifted.shape[0]]).max() <= 1e-6


def test_alignment_identity_constant_and_ramp():
    rng = np.random.default_rng(0)
    frames = rng.normal(size=(40, 60))
    assert np.array_equal(align_to_timeline(frames, 40), frames)

    constant = np.full((17, 60), -3.25)
    assert np.allclose(align_to_timeline(constant, 1150), -3.25, atol=1e-12)

    ramp = np.tile(np.arange(100, dtype=np.float64)[:, None], (1, 60))
    ideal = np.arange(1150) * 99 / 1149
    aligned = align_to_timeline(ramp, 1150)
    assert np.abs(aligned - ideal[:, None]).max() <= 1e-9
    assert aligned[0, 0] == 0.0 and aligned[-1, 0] == 99.0


def test_alignment_needs_two_frames():
    with pytest.raises(InvalidArgumentError):
        align_to_timeline(np.zeros((1, 60)), 10)
    with pytest.raises(InvalidArgumentError):
        align_to_timeline(np.zeros((5, 60)), 1)


@pytest.mark.parametrize("block", [1000, 4096, 50_000])
def test_streaming_featurizer_matches_batch(block):
    clip = noise(3 * RATE, seed=3)
    batch = featurize(clip, target_frames=180)
    featurizer = StreamingFeaturizer(len(clip.samples), RATE, target_frames=180)
    rows = [featurizer.push(clip.samples[i : i + block]) for i in range(0, len(clip.samples), block)]
    streamed = np.concatenate(rows)
    assert featurizer.done
    assert streamed.shape == batch.shape
    assert np.abs(streamed - batch).max() <= 1e-9


def test_streaming_from_file_blocks(tmp_path):
    path = tmp_path / "noise.wav"
    write_wav(path, noise(2 * RATE, seed=4))
    clip = read_wav(path)
    featurizer = StreamingFeaturizer(len(clip.samples), RATE, target_frames=120)
    streamed = np.concatenate([featurizer.push(b) for b in iter_wav_blocks(path, 2048)])
    assert np.abs(streamed - featurize(clip, target_frames=120)).max() <= 1e-9
