from dataclasses import dataclass
from pathlib import Path

import numpy as np
import soundfile as sf

from jetssm.errors import InvalidArgumentError, UnsupportedFormatError
from jetssm.io import atomic_write

CANONICAL_RATE = 38_400
WAV_FORMATS = ("WAV", "WAVEX")
SUPPORTED_SUBTYPES = ("PCM_16", "PCM_24", "PCM_32", "FLOAT")
_INT_SCALE = {"PCM_16": (2**15, np.int16, 0), "PCM_24": (2**23, np.int32, 8), "PCM_32": (2**31, np.int32, 0)}


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray  # float64 mono in [-1, 1]
    sample_rate: int = CANONICAL_RATE

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise InvalidArgumentError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.samples.ndim != 1:
            raise InvalidArgumentError(f"expected mono samples, got shape {self.samples.shape}")
        if not np.isfinite(self.samples).all():
            raise InvalidArgumentError("audio samples must be finite")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def check_wav(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such audio file: {path}")
    try:
        info = sf.info(str(path))
    except sf.LibsndfileError as e:
        raise UnsupportedFormatError("unknown", path) from e
    if info.format not in WAV_FORMATS or info.subtype not in SUPPORTED_SUBTYPES:
        raise UnsupportedFormatError(f"{info.format}/{info.subtype}", path)
    return info


def read_wav(path) -> AudioClip:
    """Read a PCM 16/24/32 or float WAV as mono float64; integer samples scale by ``1 / 2**(bits-1)``."""
    check_wav(path)
    samples, rate = sf.read(str(path), dtype="float64", always_2d=True)
    return AudioClip(samples.mean(axis=1), int(rate))


def iter_wav_blocks(path, blocksize: int):
    """Yield mono float64 blocks without loading the whole file."""
    check_wav(path)
    for block in sf.blocks(str(path), blocksize=blocksize, dtype="float64", always_2d=True):
        yield block.mean(axis=1)


def quantize(samples: np.ndarray, subtype: str) -> np.ndarray:
    """Integer samples for ``subtype`` so that reading back is within half an LSB."""
    if subtype == "FLOAT":
        return samples.astype(np.float32)
    scale, dtype, shift = _INT_SCALE[subtype]
    ints = np.clip(np.round(samples * scale), -scale, scale - 1).astype(np.int64)
    return (ints << shift).astype(dtype)


def write_wav(path, clip: AudioClip, subtype: str = "PCM_16"):
    if subtype not in SUPPORTED_SUBTYPES:
        raise UnsupportedFormatError(subtype, path)
    with atomic_write(path, "wb") as f:
        sf.write(f, quantize(clip.samples, subtype), clip.sample_rate, subtype=subtype, format="WAV")
