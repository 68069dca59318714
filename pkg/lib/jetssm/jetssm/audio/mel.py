"""Log-mel features and their alignment onto the profile timeline.

Framing is uncentered: frame ``t`` covers samples ``[t * hop, t * hop + n_fft)``, so a clip
of ``n`` samples yields ``1 + (n - n_fft) // hop`` frames. The batch path and the
streaming featurizer share every numeric helper below.
"""

from dataclasses import dataclass
from functools import lru_cache

import librosa
import numpy as np
import torch

from jetssm.audio.wav import AudioClip
from jetssm.errors import InvalidArgumentError, ShapeError

N_FFT = 1024
N_MELS = 60
LOG_FLOOR = 1e-10
MIN_HOP = 64


def hz_to_mel(f):
    return librosa.hz_to_mel(f, htk=True)


def mel_center_frequencies(n_mels=N_MELS, fmin=0.0, fmax=None, sample_rate=38_400) -> np.ndarray:
    fmax = sample_rate / 2 if fmax is None else fmax
    return librosa.mel_frequencies(n_mels + 2, fmin=fmin, fmax=fmax, htk=True)[1:-1]


def mel_filterbank(n_fft=N_FFT, sample_rate=38_400, n_mels=N_MELS, fmin=0.0, fmax=None) -> np.ndarray:
    """Unnormalized triangular HTK filters, ``[n_mels x (n_fft // 2 + 1)]``."""
    fmax = sample_rate / 2 if fmax is None else fmax
    if not 0 <= fmin < fmax <= sample_rate / 2:
        raise InvalidArgumentError(
            f"need 0 <= fmin < fmax <= sample_rate / 2, got fmin={fmin}, fmax={fmax}, rate={sample_rate}"
        )
    return _cached_filterbank(n_fft, sample_rate, n_mels, float(fmin), float(fmax)).copy()


@lru_cache(maxsize=8)
def _cached_filterbank(n_fft, sample_rate, n_mels, fmin, fmax):
    return librosa.filters.mel(
        sr=sample_rate, n_fft=n_fft, n_mels=n_mels, fmin=fmin, fmax=fmax, htk=True, norm=None,
        dtype=np.float64,
    )


def adaptive_hop(n_samples: int, target_frames: int) -> int:
    return max(MIN_HOP, n_samples // (target_frames + 1))


def stft_frame_count(n_samples: int, n_fft: int, hop: int) -> int:
    if n_samples < n_fft:
        raise InvalidArgumentError("clip shorter than one window")
    return 1 + (n_samples - n_fft) // hop


def log_mel_frames(windows: torch.Tensor, filterbank: np.ndarray) -> np.ndarray:
    """``[k x n_fft]`` raw sample windows to ``[k x n_mels]`` log-mel rows."""
    n_fft = windows.shape[-1]
    hann = torch.hann_window(n_fft, periodic=True, dtype=torch.float64)
    magnitude = torch.fft.rfft(windows * hann, dim=-1).abs()
    mel = magnitude @ torch.as_tensor(filterbank).T
    return torch.log(mel + LOG_FLOOR).numpy()


@dataclass(frozen=True)
class MelSpectrogram:
    frames: np.ndarray  # [T x n_mels] log-amplitude
    hop_seconds: float
    n_mels: int = N_MELS
    fmin: float = 0.0
    fmax: float = 19_200.0

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


def mel_spectrogram(clip: AudioClip, n_fft=N_FFT, hop=None, target_frames=1150, n_mels=N_MELS,
                    fmin=0.0, fmax=None) -> MelSpectrogram:
    """Hann-windowed magnitude STFT through the mel filterbank, then ``log(x + 1e-10)``.

    ``hop`` defaults to :func:`adaptive_hop` for ``target_frames``.
    """
    fmax = clip.sample_rate / 2 if fmax is None else fmax
    hop = adaptive_hop(len(clip.samples), target_frames) if hop is None else hop
    if hop < 1:
        raise InvalidArgumentError(f"hop must be positive, got {hop}")
    stft_frame_count(len(clip.samples), n_fft, hop)
    fb = mel_filterbank(n_fft, clip.sample_rate, n_mels, fmin, fmax)
    windows = torch.as_tensor(clip.samples, dtype=torch.float64).unfold(0, n_fft, hop)
    return MelSpectrogram(log_mel_frames(windows, fb), hop / clip.sample_rate, n_mels, fmin, fmax)


def alignment_position(j, n_source: int, n_target: int):
    """Source interpolation ``(lo, hi, weight)`` for target index ``j`` (scalar or array)."""
    p = np.asarray(j, dtype=np.float64) * (n_source - 1) / (n_target - 1)
    lo = np.floor(p).astype(np.int64)
    hi = np.minimum(lo + 1, n_source - 1)
    return lo, hi, p - lo


def _check_alignment(n_source, n_target):
    if n_source < 2:
        raise InvalidArgumentError(f"need at least 2 spectrogram frames to align, got {n_source}")
    if n_target < 2:
        raise InvalidArgumentError(f"target_frames must be >= 2, got {n_target}")


def align_to_timeline(spec, target_frames: int) -> np.ndarray:
    """Per-channel linear interpolation onto ``target_frames`` uniform points; endpoints map exactly."""
    frames = spec.frames if isinstance(spec, MelSpectrogram) else np.asarray(spec, dtype=np.float64)
    _check_alignment(frames.shape[0], target_frames)
    lo, hi, w = alignment_position(np.arange(target_frames), frames.shape[0], target_frames)
    w = w[:, None]
    return frames[lo] * (1.0 - w) + frames[hi] * w


def featurize(clip: AudioClip, target_frames: int = 1150, n_fft=N_FFT, n_mels=N_MELS) -> np.ndarray:
    """Aligned ``[target_frames x n_mels]`` log-mel matrix for one clip."""
    return align_to_timeline(mel_spectrogram(clip, n_fft=n_fft, target_frames=target_frames, n_mels=n_mels),
                             target_frames)


class StreamingFeaturizer:
    """Incremental :func:`featurize` over sample blocks.

    The total sample count fixes the hop and the interpolation grid up front. Only the
    samples of the next window and the STFT rows still needed for interpolation are
    retained, so memory stays at ``O(n_fft + hop)`` for any clip length.
    """

    def __init__(self, n_samples: int, sample_rate: int, target_frames: int = 1150, n_fft=N_FFT,
                 n_mels=N_MELS):
        self.n_fft = n_fft
        self.target_frames = target_frames
        self.hop = adaptive_hop(n_samples, target_frames)
        self.n_stft = stft_frame_count(n_samples, n_fft, self.hop)
        _check_alignment(self.n_stft, target_frames)
        self.filterbank = mel_filterbank(n_fft, sample_rate, n_mels)
        self._buffer = np.empty(0, dtype=np.float64)
        self._buffer_start = 0
        self._rows = {}
        self._next_stft = 0
        self._next_out = 0

    @property
    def done(self) -> bool:
        return self._next_out >= self.target_frames

    def push(self, block: np.ndarray) -> np.ndarray:
        """Feed samples; returns the aligned rows that became available, ``[k x n_mels]``."""
        block = np.asarray(block, dtype=np.float64)
        if block.ndim != 1:
            raise ShapeError(f"expected a mono block, got shape {block.shape}")
        self._buffer = np.concatenate([self._buffer, block])
        while self._next_stft < self.n_stft:
            start = self._next_stft * self.hop - self._buffer_start
            if start + self.n_fft > len(self._buffer):
                break
            window = torch.as_tensor(self._buffer[start : start + self.n_fft]).unsqueeze(0)
            self._rows[self._next_stft] = log_mel_frames(window, self.filterbank)[0]
            self._next_stft += 1
            drop = min(self._next_stft * self.hop - self._buffer_start, len(self._buffer))
            if drop > 0:
                self._buffer = self._buffer[drop:]
                self._buffer_start += drop
        out = []
        while not self.done:
            lo, hi, w = alignment_position(self._next_out, self.n_stft, self.target_frames)
            if hi >= self._next_stft:
                break
            out.append(self._rows[int(lo)] * (1.0 - w) + self._rows[int(hi)] * w)
            self._next_out += 1
            next_lo = alignment_position(min(self._next_out, self.target_frames - 1), self.n_stft,
                                         self.target_frames)[0]
            for stale in [k for k in self._rows if k < next_lo]:
                del self._rows[stale]
        return np.stack(out) if out else np.empty((0, self.filterbank.shape[0]))
