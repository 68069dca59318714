from dataclasses import asdict, dataclass, fields

import torch

from jetssm.errors import ConfigValidationError
from jetssm.ssm import Discretization

NORM_KINDS = ("batch", "layer")
ACTIVATIONS = ("gelu", "identity")
DTYPES = {"float64": torch.float64, "float32": torch.float32}


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters shared by every model kind.

    ``n_state`` is the full state size; with conjugate pairs only half of it is stored.
    The recurrent and MLP fields are ignored by the S4D model and vice versa.
    """

    in_channels: int = 130
    hidden_dim: int = 256
    out_channels: int = 70
    n_blocks: int = 4
    n_state: int = 64
    dropout: float = 0.1
    norm_kind: str = "batch"
    activation: str = "gelu"
    discretization: str = Discretization.ZOH.value
    use_feedthrough: bool = True
    shared_a: bool = False
    conj_pairs: bool = True
    dt_min: float = 1e-3
    dt_max: float = 1e-1
    rnn_layers: int = 1
    mlp_depth: int = 3
    mlp_hidden: int = 256
    dtype: str = "float64"
    seed: int = 0

    def __post_init__(self):
        errors = []
        for name in ("in_channels", "hidden_dim", "out_channels", "n_state", "rnn_layers", "mlp_depth",
                     "mlp_hidden"):
            if getattr(self, name) < 1:
                errors.append(f"{name} must be >= 1, got {getattr(self, name)}")
        if not 1 <= self.n_blocks <= 6:
            errors.append(f"n_blocks must be in [1, 6], got {self.n_blocks}")
        if self.conj_pairs and self.n_state % 2:
            errors.append(f"n_state must be even with conj_pairs, got {self.n_state}")
        if not 0.0 <= self.dropout < 1.0:
            errors.append(f"dropout must be in [0, 1), got {self.dropout}")
        if self.norm_kind not in NORM_KINDS:
            errors.append(f"norm_kind must be one of {NORM_KINDS}, got {self.norm_kind!r}")
        if self.activation not in ACTIVATIONS:
            errors.append(f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")
        if self.discretization not in {d.value for d in Discretization}:
            errors.append(f"discretization must be zoh or bilinear, got {self.discretization!r}")
        if not 0 < self.dt_min <= self.dt_max:
            errors.append(f"need 0 < dt_min <= dt_max, got {self.dt_min}, {self.dt_max}")
        if self.dtype not in DTYPES:
            errors.append(f"dtype must be one of {tuple(DTYPES)}, got {self.dtype!r}")
        if errors:
            raise ConfigValidationError(errors)

    @property
    def torch_dtype(self) -> torch.dtype:
        return DTYPES[self.dtype]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(payload) - known)
        if unknown:
            raise ConfigValidationError([f"unknown model field {name!r}" for name in unknown])
        return cls(**payload)
