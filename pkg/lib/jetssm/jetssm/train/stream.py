"""Frame-at-a-time inference from a WAV file through the recurrent S4D view."""

import numpy as np
import torch

from jetssm.audio import StreamingFeaturizer, iter_wav_blocks
from jetssm.audio.wav import check_wav
from jetssm.data.samples import N_PROFILE, PROFILE_SLICE
from jetssm.errors import InvalidArgumentError, UnsupportedModeError
from jetssm.train.checkpoint import Checkpoint

DEFAULT_BLOCK = 4096


def stream_blocks(ckpt: Checkpoint, wav_path, frames: int = 1150, block_size: int = DEFAULT_BLOCK):
    """Yield a ``[n x 70]`` array of depth rows in um for every block read from ``wav_path``.

    ``n`` is the number of timeline frames the block completes and may be 0.

    Inputs are built as in evaluation: mel features and zero-filled profile columns,
    normalized with the checkpoint's feature stats and masked after normalization.
    """
    if block_size < 1:
        raise InvalidArgumentError(f"block_size must be >= 1, got {block_size}")
    model = ckpt.to_model()
    if not getattr(model, "supports_streaming", False):
        raise UnsupportedModeError(f"model kind {ckpt.model_kind!r} has no recurrent view; use eval instead")
    ckpt.check_compatible(ckpt.feature_stats.channels)
    info = check_wav(wav_path)
    featurizer = StreamingFeaturizer(info.frames, info.samplerate, target_frames=frames)
    stream = model.stream()
    dtype = ckpt.model_config.torch_dtype
    for block in iter_wav_blocks(wav_path, block_size):
        rows = np.empty((0, N_PROFILE))
        mel_rows = featurizer.push(block)
        if len(mel_rows):
            x = ckpt.feature_stats.apply(np.concatenate([mel_rows, np.zeros((len(mel_rows), N_PROFILE))], axis=1))
            x[:, PROFILE_SLICE] = 0.0
            y = np.stack([stream.step(torch.as_tensor(row, dtype=dtype)).to(torch.float64).numpy() for row in x])
            rows = ckpt.target_stats.invert(y) if ckpt.standardize_targets else y
        yield rows
        if featurizer.done:
            break


def stream_predict(ckpt: Checkpoint, wav_path, frames: int = 1150, block_size: int = DEFAULT_BLOCK):
    """Yield one ``[70]`` depth row in um per output frame; see :func:`stream_blocks`."""
    for rows in stream_blocks(ckpt, wav_path, frames, block_size):
        yield from rows
