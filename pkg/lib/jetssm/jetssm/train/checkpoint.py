"""Single-file checkpoints.

Layout: an 8-byte little-endian unsigned header length, a UTF-8 JSON header with sorted keys,
then every array as raw little-endian float64 in header order. Nothing time-dependent goes
into the header, so identical training runs produce identical bytes.
"""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from jetssm import __version__
from jetssm.data.samples import NormStats
from jetssm.errors import CheckpointIncompatibleError
from jetssm.io import atomic_write
from jetssm.nn import ModelConfig, build_model

FORMAT_VERSION = 1
_LENGTH = np.dtype("<u8")
_ARRAY = np.dtype("<f8")


@dataclass
class Checkpoint:
    model_kind: str
    model_config: ModelConfig
    state: dict  # name -> np.ndarray, in state_dict order
    feature_stats: NormStats
    target_stats: NormStats
    standardize_targets: bool = True
    seed: int = 0
    train_config: dict = field(default_factory=dict)
    dtypes: dict = field(default_factory=dict)  # name -> original torch dtype string

    @classmethod
    def from_model(cls, model, kind, feature_stats, target_stats, standardize_targets=True, seed=0,
                   train_config=None) -> "Checkpoint":
        sd = model.state_dict()
        return cls(
            kind,
            model.config,
            {k: v.detach().cpu().to(torch.float64).numpy().copy() for k, v in sd.items()},
            feature_stats,
            target_stats,
            standardize_targets,
            seed,
            dict(train_config or {}),
            {k: str(v.dtype).removeprefix("torch.") for k, v in sd.items()},
        )

    def to_model(self) -> torch.nn.Module:
        model = build_model(self.model_kind, self.model_config)
        reference = model.state_dict()
        missing = sorted(set(reference) - set(self.state))
        if missing:
            raise CheckpointIncompatibleError("parameters", f"{len(reference)} arrays", f"missing {missing[:3]}")
        loaded = {}
        for name, ref in reference.items():
            array = self.state[name]
            if tuple(array.shape) != tuple(ref.shape):
                raise CheckpointIncompatibleError(name, tuple(ref.shape), tuple(array.shape))
            loaded[name] = torch.from_numpy(array.copy()).to(ref.dtype)
        model.load_state_dict(loaded)
        model.eval()
        return model

    def check_compatible(self, in_channels: int, out_channels: int | None = None):
        cfg = self.model_config
        if in_channels != cfg.in_channels:
            raise CheckpointIncompatibleError("in_channels", cfg.in_channels, in_channels)
        if self.feature_stats.channels != cfg.in_channels:
            raise CheckpointIncompatibleError("feature_stats", cfg.in_channels, self.feature_stats.channels)
        if out_channels is not None and out_channels != cfg.out_channels:
            raise CheckpointIncompatibleError("out_channels", cfg.out_channels, out_channels)

    def config_digest(self) -> str:
        payload = json.dumps({"kind": self.model_kind, "model": self.model_config.to_dict(),
                              "train": self.train_config}, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _stat_arrays(ckpt: Checkpoint):
    return {
        "stats/features/mean": ckpt.feature_stats.mean,
        "stats/features/std": ckpt.feature_stats.std,
        "stats/targets/mean": ckpt.target_stats.mean,
        "stats/targets/std": ckpt.target_stats.std,
    }


def save_checkpoint(path, ckpt: Checkpoint):
    arrays = {**ckpt.state, **_stat_arrays(ckpt)}
    header = {
        "format_version": FORMAT_VERSION,
        "model_kind": ckpt.model_kind,
        "model_config": ckpt.model_config.to_dict(),
        "train_config": ckpt.train_config,
        "standardize_targets": ckpt.standardize_targets,
        "seed": ckpt.seed,
        "provenance": {"features": ckpt.feature_stats.provenance, "targets": ckpt.target_stats.provenance},
        "arrays": [
            {"name": name, "shape": list(a.shape), "dtype": ckpt.dtypes.get(name, "float64")}
            for name, a in arrays.items()
        ],
        "metadata": {"library_version": __version__, "config_digest": ckpt.config_digest()},
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with atomic_write(path, "wb") as f:
        f.write(np.array([len(blob)], dtype=_LENGTH).tobytes())
        f.write(blob)
        for a in arrays.values():
            f.write(np.ascontiguousarray(a, dtype=_ARRAY).tobytes())


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such checkpoint: {path}")
    raw = path.read_bytes()
    if len(raw) < _LENGTH.itemsize:
        raise CheckpointIncompatibleError("header", "8-byte length prefix", f"{len(raw)} bytes")
    n = int(np.frombuffer(raw[: _LENGTH.itemsize], dtype=_LENGTH)[0])
    try:
        header = json.loads(raw[_LENGTH.itemsize : _LENGTH.itemsize + n].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointIncompatibleError("header", "JSON", f"unparseable ({e})") from None
    if header.get("format_version") != FORMAT_VERSION:
        raise CheckpointIncompatibleError("format_version", FORMAT_VERSION, header.get("format_version"))

    offset = _LENGTH.itemsize + n
    arrays, dtypes = {}, {}
    for entry in header["arrays"]:
        count = int(np.prod(entry["shape"], dtype=np.int64))
        end = offset + count * _ARRAY.itemsize
        if end > len(raw):
            raise CheckpointIncompatibleError(entry["name"], f"{count} elements", "truncated data")
        arrays[entry["name"]] = np.frombuffer(raw[offset:end], dtype=_ARRAY).reshape(entry["shape"]).astype(np.float64)
        dtypes[entry["name"]] = entry["dtype"]
        offset = end
    if offset != len(raw):
        raise CheckpointIncompatibleError("data", f"{offset} bytes", f"{len(raw)} bytes")

    provenance = header.get("provenance", {})
    feature_stats = NormStats(arrays.pop("stats/features/mean"), arrays.pop("stats/features/std"),
                              provenance.get("features", "unknown"))
    target_stats = NormStats(arrays.pop("stats/targets/mean"), arrays.pop("stats/targets/std"),
                             provenance.get("targets", "unknown"))
    for name in [k for k in dtypes if k.startswith("stats/")]:
        dtypes.pop(name)
    return Checkpoint(
        header["model_kind"],
        ModelConfig.from_dict(header["model_config"]),
        arrays,
        feature_stats,
        target_stats,
        header["standardize_targets"],
        header["seed"],
        header["train_config"],
        dtypes,
    )
