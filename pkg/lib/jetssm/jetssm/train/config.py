import math
from dataclasses import asdict, dataclass, fields

from jetssm.errors import ConfigValidationError
from jetssm.nn.registry import model_kinds


def _from_dict(cls, payload: dict, section: str):
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(payload) - known)
    if unknown:
        raise ConfigValidationError([f"unknown {section} field {name!r}" for name in unknown])
    return cls(**payload)


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings.

    ``dropout`` overrides the model's dropout when set. Training windows carry their profile
    columns; ``mask_probability`` is an opt-in chance that a window has them zero-filled, as they
    are at inference.
    """

    epochs: int = 30
    learning_rate: float = 1e-3
    adam_betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    dropout: float | None = None
    seed: int = 0
    window_length: int = 128
    stride: int = 64
    batch_size: int = 4
    standardize_targets: bool = True
    mask_probability: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "adam_betas", tuple(float(b) for b in self.adam_betas))
        errors = []
        if self.epochs < 1:
            errors.append(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate > 0:
            errors.append(f"learning_rate must be > 0, got {self.learning_rate}")
        if len(self.adam_betas) != 2 or not all(0 <= b < 1 for b in self.adam_betas):
            errors.append(f"adam_betas must be two values in [0, 1), got {self.adam_betas}")
        if not self.adam_eps > 0:
            errors.append(f"adam_eps must be > 0, got {self.adam_eps}")
        if self.dropout is not None and not 0 <= self.dropout < 1:
            errors.append(f"dropout must be in [0, 1), got {self.dropout}")
        for name in ("window_length", "stride", "batch_size"):
            if getattr(self, name) < 1:
                errors.append(f"{name} must be >= 1, got {getattr(self, name)}")
        if not 0 <= self.mask_probability <= 1:
            errors.append(f"mask_probability must be in [0, 1], got {self.mask_probability}")
        if errors:
            raise ConfigValidationError(errors)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["adam_betas"] = list(self.adam_betas)
        return d

    @classmethod
    def from_dict(cls, payload: dict) -> "TrainConfig":
        return _from_dict(cls, payload, "train")


@dataclass(frozen=True)
class TrialSpace:
    """Search ranges. Integer ranges are inclusive; ``learning_rate`` is sampled log-uniformly."""

    model_kind: str = "s4d"
    hidden_dim: tuple[int, ...] = (64, 128, 256)
    n_blocks: tuple[int, int] = (1, 6)
    learning_rate: tuple[float, float] = (1e-4, 1e-2)
    dropout: tuple[float, float] = (0.0, 0.3)
    mlp_depth: tuple[int, int] = (2, 6)
    mlp_hidden: tuple[int, ...] = (64, 128, 256)
    rnn_layers: tuple[int, int] = (1, 3)
    n_trials: int = 50
    epochs: int = 30

    def __post_init__(self):
        for f in fields(self):
            if isinstance(getattr(self, f.name), list):
                object.__setattr__(self, f.name, tuple(getattr(self, f.name)))
        errors = []
        if self.model_kind not in model_kinds():
            errors.append(f"model_kind must be one of {model_kinds()}, got {self.model_kind!r}")
        for name in ("hidden_dim", "mlp_hidden"):
            values = getattr(self, name)
            if not values or any(v < 1 for v in values):
                errors.append(f"{name} must be a nonempty list of positive sizes, got {values}")
        for name in ("n_blocks", "learning_rate", "dropout", "mlp_depth", "rnn_layers"):
            bounds = getattr(self, name)
            if len(bounds) != 2 or bounds[0] > bounds[1]:
                errors.append(f"{name} must be a nonempty [low, high] range, got {bounds}")
        if len(self.n_blocks) == 2 and not (1 <= self.n_blocks[0] and self.n_blocks[1] <= 6):
            errors.append(f"n_blocks range must lie within [1, 6], got {self.n_blocks}")
        if len(self.learning_rate) == 2 and not self.learning_rate[0] > 0:
            errors.append(f"learning_rate range must be positive, got {self.learning_rate}")
        if len(self.dropout) == 2 and not (0 <= self.dropout[0] and self.dropout[1] < 1):
            errors.append(f"dropout range must lie within [0, 1), got {self.dropout}")
        if len(self.mlp_depth) == 2 and self.mlp_depth[0] < 1:
            errors.append(f"mlp_depth range must start at >= 1, got {self.mlp_depth}")
        if len(self.rnn_layers) == 2 and self.rnn_layers[0] < 1:
            errors.append(f"rnn_layers range must start at >= 1, got {self.rnn_layers}")
        if self.n_trials < 1:
            errors.append(f"n_trials must be >= 1, got {self.n_trials}")
        if self.epochs < 1:
            errors.append(f"epochs must be >= 1, got {self.epochs}")
        if errors:
            raise ConfigValidationError(errors)

    def sample(self, rng) -> dict:
        """One point of the space drawn from a numpy ``Generator``."""
        lo, hi = self.learning_rate
        params = {
            "hidden_dim": int(rng.choice(self.hidden_dim)),
            "learning_rate": float(math.exp(rng.uniform(math.log(lo), math.log(hi)))),
            "dropout": float(rng.uniform(*self.dropout)),
        }
        if self.model_kind == "s4d":
            params["n_blocks"] = int(rng.integers(self.n_blocks[0], self.n_blocks[1] + 1))
        elif self.model_kind in ("gru", "lstm"):
            params["rnn_layers"] = int(rng.integers(self.rnn_layers[0], self.rnn_layers[1] + 1))
        elif self.model_kind == "mlp_deep":
            params["mlp_depth"] = int(rng.integers(self.mlp_depth[0], self.mlp_depth[1] + 1))
            params["mlp_hidden"] = int(rng.choice(self.mlp_hidden))
        elif self.model_kind == "mlp_shallow":
            params["mlp_hidden"] = int(rng.choice(self.mlp_hidden))
        return params

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, payload: dict) -> "TrialSpace":
        return _from_dict(cls, payload, "search")
