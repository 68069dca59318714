from dataclasses import dataclass, field

import numpy as np
import torch

from jetssm.errors import InvalidArgumentError, ShapeError


def _check_shapes(pred, target):
    if tuple(pred.shape) != tuple(target.shape):
        raise ShapeError(f"prediction shape {tuple(pred.shape)} != target shape {tuple(target.shape)}")


def mse_loss(pred, target):
    """Mean squared error over every entry; differentiable for tensors."""
    _check_shapes(pred, target)
    if isinstance(pred, torch.Tensor):
        return torch.mean((pred - target) ** 2)
    return float(np.mean((np.asarray(pred, dtype=np.float64) - np.asarray(target, dtype=np.float64)) ** 2))


def accuracy_within(pred, target, tau_um: float = 1.0) -> float:
    """Percentage of entries with ``|pred - target| <= tau_um``."""
    _check_shapes(pred, target)
    if not tau_um > 0:
        raise InvalidArgumentError(f"tau must be > 0, got {tau_um}")
    if isinstance(pred, torch.Tensor):
        pred = pred.detach().cpu().numpy()
    if isinstance(target, torch.Tensor):
        target = target.detach().cpu().numpy()
    err = np.abs(np.asarray(pred, dtype=np.float64) - np.asarray(target, dtype=np.float64))
    return 100.0 * np.count_nonzero(err <= tau_um) / err.size


@dataclass
class EvalReport:
    model_name: str
    threshold_um: float
    accuracy_pct: float
    normalized_accuracy_pct: float
    mse: float
    per_frame_error: list[float]
    per_column_error: list[float]
    mask: bool = False
    extra_accuracy_pct: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.accuracy_pct <= 100:
            raise InvalidArgumentError(f"accuracy out of range: {self.accuracy_pct}")
        if self.mse < 0:
            raise InvalidArgumentError(f"mse must be >= 0, got {self.mse}")

    def to_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "threshold_um": self.threshold_um,
            "accuracy_pct": self.accuracy_pct,
            "normalized_accuracy_pct": self.normalized_accuracy_pct,
            "mse": self.mse,
            "mask": self.mask,
            "extra_accuracy_pct": {str(k): v for k, v in self.extra_accuracy_pct.items()},
            "per_column_error": self.per_column_error,
            "per_frame_error": self.per_frame_error,
            "config": self.config,
        }

    def column_summary(self) -> dict:
        errors = np.asarray(self.per_column_error)
        return {
            "min": float(errors.min()),
            "median": float(np.median(errors)),
            "max": float(errors.max()),
            "worst_column": int(errors.argmax()),
        }
