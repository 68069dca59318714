import json
import os
from dataclasses import dataclass, field

import numpy as np
from torchrl._utils import logger as torchrl_logger

from jetssm.data import GeneratorConfig, StairsSchedule
from jetssm.errors import ConfigValidationError
from jetssm.io import read_json
from jetssm.nn import ModelConfig
from jetssm.train import TrainConfig, TrialSpace

SEED_ENV = "JETSSM_SEED"

SECTIONS = {
    "schedule": StairsSchedule,
    "generator": GeneratorConfig,
    "model": ModelConfig,
    "train": TrainConfig,
    "search": TrialSpace,
}


@dataclass(frozen=True)
class RunConfig:
    schedule: StairsSchedule = field(default_factory=StairsSchedule)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    search: TrialSpace = field(default_factory=TrialSpace)
    tau_um: float = 1.0

    def __post_init__(self):
        if not self.tau_um > 0:
            raise ConfigValidationError([f"tau_um must be > 0, got {self.tau_um}"])

    def to_dict(self) -> dict:
        return {name: getattr(self, name).to_dict() for name in SECTIONS} | {"tau_um": self.tau_um}


def split_overrides(namespace) -> dict:
    """``{"train.epochs": 3}``-style argparse dests to ``{"train": {"epochs": 3}}``."""
    out = {}
    for dest, value in vars(namespace).items():
        if "." in dest:
            section, name = dest.split(".", 1)
            out.setdefault(section, {})[name] = value
    return out


def build_run_config(config_path=None, overrides: dict | None = None) -> RunConfig:
    """Dataclass defaults, then the JSON file at ``config_path``, then ``overrides`` (command-line flags).

    Every invalid field across all sections is reported in one ``ConfigValidationError``.
    """
    try:
        payload = read_json(config_path) if config_path else {}
    except json.JSONDecodeError as e:
        raise ConfigValidationError([f"{config_path}: not valid JSON ({e})"]) from e
    if not isinstance(payload, dict):
        raise ConfigValidationError([f"{config_path}: expected a JSON object, got {type(payload).__name__}"])
    overrides = overrides or {}
    unknown = sorted(set(payload) - set(SECTIONS) - {"tau_um"})
    errors = [f"unknown config section {name!r}" for name in unknown]
    built = {}
    for name, cls in SECTIONS.items():
        merged = {**payload.get(name, {}), **overrides.get(name, {})}
        try:
            built[name] = cls.from_dict(merged)
        except ConfigValidationError as e:
            errors.extend(f"{name}: {msg}" for msg in e.errors)
        except TypeError as e:
            errors.append(f"{name}: {e}")
    tau = overrides.get("run", {}).get("tau_um", payload.get("tau_um", 1.0))
    if errors:
        raise ConfigValidationError(errors)
    return RunConfig(**built, tau_um=tau)


def resolve_seed(flag: int | None) -> int:
    """``--seed``, else ``$JETSSM_SEED``, else a fresh seed that gets logged."""
    if flag is not None:
        return int(flag)
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigValidationError([f"{SEED_ENV} must be an integer, got {env!r}"]) from None
    seed = int(np.random.SeedSequence().entropy % (2**31))
    torchrl_logger.warning(f"no seed given; generated seed {seed} (pass --seed {seed} to reproduce)")
    return seed
