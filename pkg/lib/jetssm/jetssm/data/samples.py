from dataclasses import dataclass

import numpy as np

from jetssm.data.profiles import ErosionProfileSet
from jetssm.errors import InvalidArgumentError, ShapeError

N_MEL = 60
N_PROFILE = 70
PROFILE_SLICE = slice(N_MEL, N_MEL + N_PROFILE)


@dataclass(frozen=True)
class NormStats:
    """Per-channel z-score statistics together with where they were computed."""

    mean: np.ndarray
    std: np.ndarray  # 1.0 on zero-variance channels
    provenance: str = "unknown"

    @property
    def channels(self) -> int:
        return len(self.mean)

    def apply(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.channels:
            raise ShapeError(f"data has {x.shape[-1]} channels, stats have {self.channels}")
        return (x - self.mean) / self.std

    def invert(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.channels:
            raise ShapeError(f"data has {x.shape[-1]} channels, stats have {self.channels}")
        return x * self.std + self.mean

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist(), "provenance": self.provenance}

    @classmethod
    def from_dict(cls, payload: dict) -> "NormStats":
        return cls(np.asarray(payload["mean"], dtype=np.float64), np.asarray(payload["std"], dtype=np.float64),
                   payload.get("provenance", "unknown"))

    @classmethod
    def identity(cls, channels: int) -> "NormStats":
        return cls(np.zeros(channels), np.ones(channels), "identity")


def compute_stats(x: np.ndarray, provenance: str = "unknown") -> NormStats:
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    zero = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    return NormStats(mean, np.where(zero, 1.0, std), provenance)


def normalize_features(x: np.ndarray, stats: NormStats | None = None, provenance: str = "unknown"):
    """Z-score ``x`` per channel; stats are computed from ``x`` only when not given."""
    x = np.asarray(x, dtype=np.float64)
    if stats is None:
        stats = compute_stats(x, provenance)
    return stats.apply(x), stats


@dataclass(frozen=True)
class AlignedSample:
    input: np.ndarray  # [frames x 130]: 60 mel then 70 profile columns
    target: np.ndarray  # [frames x 70], um
    profile_mask: bool

    def __post_init__(self):
        if self.input.shape[0] != self.target.shape[0]:
            raise ShapeError(f"input has {self.input.shape[0]} frames, target {self.target.shape[0]}")
        if self.input.shape[1] != N_MEL + N_PROFILE or self.target.shape[1] != N_PROFILE:
            raise ShapeError(f"bad channel layout {self.input.shape} / {self.target.shape}")
        if not self.profile_mask and np.any(self.input[:, PROFILE_SLICE] != 0):
            raise InvalidArgumentError("masked sample has nonzero profile columns")

    @property
    def frames(self) -> int:
        return self.input.shape[0]


def mask_profiles(x: np.ndarray) -> np.ndarray:
    out = np.array(x, dtype=np.float64, copy=True)
    out[..., PROFILE_SLICE] = 0.0
    return out


def assemble_sample(mel: np.ndarray, profiles, mask: bool, stats: NormStats | None = None) -> AlignedSample:
    """Concatenate ``[mel | profiles]`` (normalized with ``stats`` if given), zero-filling profiles when masked.

    The target is always the raw profile in um.
    """
    depths = profiles.depths if isinstance(profiles, ErosionProfileSet) else np.asarray(profiles, dtype=np.float64)
    if mel.shape[0] != depths.shape[0]:
        raise ShapeError(f"mel has {mel.shape[0]} frames, profiles have {depths.shape[0]}")
    x = np.concatenate([mel, depths], axis=1)
    if stats is not None:
        x = stats.apply(x)
    return AlignedSample(x if mask else mask_profiles(x), depths.copy(), bool(mask))


def split_train_test(frames: int) -> tuple[slice, slice]:
    """Chronological split at ``frames // 2``."""
    if frames < 2:
        raise InvalidArgumentError(f"need at least 2 frames to split, got {frames}")
    half = frames // 2
    return slice(0, half), slice(half, frames)


@dataclass(frozen=True)
class Dataset:
    """Normalized, unmasked train/test halves of one or more trials plus their train-only stats."""

    train_inputs: tuple[np.ndarray, ...]
    train_targets: tuple[np.ndarray, ...]
    test_inputs: tuple[np.ndarray, ...]
    test_targets: tuple[np.ndarray, ...]
    feature_stats: NormStats
    target_stats: NormStats

    def samples(self, split: str, mask: bool) -> list[AlignedSample]:
        """``"train"`` or ``"test"`` halves, or ``"all"`` for each trial's whole timeline."""
        if split == "all":
            inputs = [np.concatenate(pair) for pair in zip(self.train_inputs, self.test_inputs)]
            targets = [np.concatenate(pair) for pair in zip(self.train_targets, self.test_targets)]
        elif split in ("train", "test"):
            inputs = self.train_inputs if split == "train" else self.test_inputs
            targets = self.train_targets if split == "train" else self.test_targets
        else:
            raise InvalidArgumentError(f"split must be 'train', 'test' or 'all', got {split!r}")
        return [AlignedSample(x if mask else mask_profiles(x), y, mask) for x, y in zip(inputs, targets)]


def prepare_dataset(trials, feature_stats: NormStats | None = None, target_stats: NormStats | None = None) -> Dataset:
    """Split each ``(mel [F x 60], profiles)`` trial, then normalize everything with train-half stats.

    Stats passed in (from a checkpoint) are used as-is and never recomputed.
    """
    trials = list(trials)
    if not trials:
        raise InvalidArgumentError("no trials given")
    raw_train, raw_test = [], []
    for mel, profiles in trials:
        sample = assemble_sample(mel, profiles, mask=True)
        train, test = split_train_test(sample.frames)
        raw_train.append((sample.input[train], sample.target[train]))
        raw_test.append((sample.input[test], sample.target[test]))
    half = raw_train[0][0].shape[0]
    provenance = f"train[0:{half}]" + (f" x {len(trials)} trials" if len(trials) > 1 else "")
    if feature_stats is None:
        feature_stats = compute_stats(np.concatenate([x for x, _ in raw_train]), provenance)
    if target_stats is None:
        target_stats = compute_stats(np.concatenate([y for _, y in raw_train]), provenance)
    return Dataset(
        tuple(feature_stats.apply(x) for x, _ in raw_train),
        tuple(y for _, y in raw_train),
        tuple(feature_stats.apply(x) for x, _ in raw_test),
        tuple(y for _, y in raw_test),
        feature_stats,
        target_stats,
    )
