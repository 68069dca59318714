import importlib
from dataclasses import dataclass, field

import torch
from tensordict.nn import TensorDictModule

from jetssm.errors import InvalidArgumentError
from jetssm.nn.config import ModelConfig


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    entry_point: str
    kwargs: dict = field(default_factory=dict)

    def load(self):
        module_name, attr = self.entry_point.split(":")
        return getattr(importlib.import_module(module_name), attr)


_registry: dict[str, ModelSpec] = {}


def register(kind: str, entry_point: str, **kwargs):
    """Register a model kind under ``"module.path:ClassName"``; extra kwargs go to ``from_config``."""
    _registry[kind] = ModelSpec(kind, entry_point, kwargs)


def model_kinds() -> list[str]:
    return sorted(_registry)


def spec(kind: str) -> ModelSpec:
    try:
        return _registry[kind]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown model kind {kind!r}; valid kinds: {', '.join(model_kinds())}"
        ) from None


def build_model(kind: str, config: ModelConfig) -> torch.nn.Module:
    """Construct a model with parameters drawn from ``config.seed`` without touching the global RNG."""
    model_spec = spec(kind)
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(config.seed)
        model = model_spec.load().from_config(config, **model_spec.kwargs)
    model.kind = kind
    return model.to(config.torch_dtype)


def as_module(model: torch.nn.Module) -> TensorDictModule:
    return TensorDictModule(model, in_keys=["features"], out_keys=["prediction"])
