"""Files on disk to model-ready datasets.

A trial directory holds ``trial_<seed>.wav``, ``trial_<seed>.csv`` (profiles) and
``trial_<seed>.json`` (schedule and generator metadata) for each generated trial.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from jetssm.audio import featurize, read_wav, write_wav
from jetssm.data.profiles import ErosionProfileSet, load_profiles_csv, write_profiles_csv
from jetssm.data.samples import Dataset, NormStats, prepare_dataset
from jetssm.data.schedule import StairsSchedule
from jetssm.data.synth import GeneratorConfig, Trial
from jetssm.io import write_json


@dataclass(frozen=True)
class TrialFiles:
    wav: Path
    profiles: Path
    metadata: Path | None = None

    @classmethod
    def for_seed(cls, directory, seed: int) -> "TrialFiles":
        directory = Path(directory)
        stem = f"trial_{seed:06d}"
        return cls(directory / f"{stem}.wav", directory / f"{stem}.csv", directory / f"{stem}.json")


def write_trial(directory, trial: Trial, schedule: StairsSchedule, config: GeneratorConfig) -> TrialFiles:
    files = TrialFiles.for_seed(directory, trial.seed)
    write_wav(files.wav, trial.clip)
    write_profiles_csv(files.profiles, trial.profiles)
    write_json(files.metadata, {
        "seed": trial.seed,
        "schedule": schedule.to_dict(),
        "generator": config.to_dict(),
        "frames": trial.profiles.frames,
        "sample_rate": trial.clip.sample_rate,
        "synthetic_tau_um": config.synthetic_tau_um,
    })
    return files


def find_trials(path) -> list[TrialFiles]:
    """Trials under a directory (sorted), or the single trial named by a WAV or CSV path."""
    path = Path(path)
    if path.is_dir():
        wavs = sorted(path.glob("*.wav"))
        if not wavs:
            raise FileNotFoundError(f"no WAV files in {path}")
    elif path.suffix.lower() in (".wav", ".csv"):
        wavs = [path.with_suffix(".wav")]
    else:
        raise FileNotFoundError(f"not a trial directory or trial file: {path}")
    files = []
    for wav in wavs:
        csv = wav.with_suffix(".csv")
        for p in (wav, csv):
            if not p.is_file():
                raise FileNotFoundError(f"missing trial file {p}")
        meta = wav.with_suffix(".json")
        files.append(TrialFiles(wav, csv, meta if meta.is_file() else None))
    return files


def load_trial(files: TrialFiles) -> tuple[np.ndarray, ErosionProfileSet]:
    """Aligned ``[F x 60]`` log-mel features and the ``[F x 70]`` profiles of one trial."""
    profiles = load_profiles_csv(files.profiles)
    mel = featurize(read_wav(files.wav), target_frames=profiles.frames)
    return mel, profiles


def load_dataset(path, feature_stats: NormStats | None = None, target_stats: NormStats | None = None) -> Dataset:
    return prepare_dataset((load_trial(f) for f in find_trials(path)), feature_stats, target_stats)


def dataset_from_trials(trials, feature_stats: NormStats | None = None,
                        target_stats: NormStats | None = None) -> Dataset:
    """In-memory counterpart of :func:`load_dataset` for synthesized trials."""
    pairs = [(featurize(t.clip, target_frames=t.profiles.frames), t.profiles) for t in trials]
    return prepare_dataset(pairs, feature_stats, target_stats)
