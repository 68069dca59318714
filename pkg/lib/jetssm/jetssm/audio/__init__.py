from jetssm.audio.mel import (
    MelSpectrogram,
    StreamingFeaturizer,
    align_to_timeline,
    featurize,
    hz_to_mel,
    mel_center_frequencies,
    mel_filterbank,
    mel_spectrogram,
)
from jetssm.audio.wav import CANONICAL_RATE, AudioClip, iter_wav_blocks, read_wav, write_wav

__all__ = [
    "CANONICAL_RATE",
    "AudioClip",
    "MelSpectrogram",
    "StreamingFeaturizer",
    "align_to_timeline",
    "featurize",
    "hz_to_mel",
    "iter_wav_blocks",
    "mel_center_frequencies",
    "mel_filterbank",
    "mel_spectrogram",
    "read_wav",
    "write_wav",
]
