from dataclasses import dataclass, field, replace

import numpy as np
import torch
import tqdm
from tensordict import TensorDict
from torchrl._utils import logger as torchrl_logger

from jetssm.data.samples import PROFILE_SLICE, Dataset, NormStats
from jetssm.errors import InvalidArgumentError
from jetssm.nn import GradientTape, ModelConfig, as_module, backward, build_model
from jetssm.train.checkpoint import Checkpoint
from jetssm.train.config import TrainConfig
from jetssm.train.metrics import EvalReport, accuracy_within, mse_loss
from jetssm.train.optim import AdamState, adam_step


@dataclass
class History:
    epoch_loss: list[float] = field(default_factory=list)
    n_windows: int = 0

    def to_dict(self) -> dict:
        return {"epoch_loss": self.epoch_loss, "n_windows": self.n_windows}


def make_windows(inputs, targets, window_length: int, stride: int):
    """Overlapping ``[W x window_length x C]`` windows; the last window is flush with the sequence end."""
    xs, ys = [], []
    for x, y in zip(inputs, targets):
        frames = x.shape[0]
        if window_length > frames:
            raise InvalidArgumentError(f"window_length {window_length} exceeds {frames} training frames")
        starts = list(range(0, frames - window_length + 1, stride))
        if starts[-1] != frames - window_length:
            starts.append(frames - window_length)
        xs.extend(x[s : s + window_length] for s in starts)
        ys.extend(y[s : s + window_length] for s in starts)
    return np.stack(xs), np.stack(ys)


def _targets_for_training(targets, stats: NormStats, standardize: bool):
    return [stats.apply(y) if standardize else y for y in targets]


def train(kind: str, model_config: ModelConfig, config: TrainConfig, dataset: Dataset, logger=None,
          progress: bool = True) -> tuple[Checkpoint, History]:
    """Fit ``kind`` on the train halves of ``dataset``; deterministic for a given ``config.seed``."""
    if not dataset.train_inputs or sum(x.shape[0] for x in dataset.train_inputs) == 0:
        raise InvalidArgumentError("empty training data")
    model_config = replace(model_config, seed=config.seed)
    if config.dropout is not None:
        model_config = replace(model_config, dropout=config.dropout)
    dtype = model_config.torch_dtype

    x, y = make_windows(
        dataset.train_inputs,
        _targets_for_training(dataset.train_targets, dataset.target_stats, config.standardize_targets),
        config.window_length,
        config.stride,
    )
    features = torch.as_tensor(x, dtype=dtype)
    targets = torch.as_tensor(y, dtype=dtype)
    n_windows = features.shape[0]

    history = History(n_windows=n_windows)
    with torch.random.fork_rng(devices=[]):
        model = build_model(kind, model_config)
        model.train()
        module = as_module(model)
        torch.manual_seed(config.seed)
        generator = torch.Generator().manual_seed(config.seed)
        params = dict(model.named_parameters())
        state = AdamState.zeros({k: p.detach() for k, p in params.items()})

        pbar = tqdm.tqdm(total=config.epochs, disable=not progress)
        for epoch in range(config.epochs):
            total = 0.0
            for idx in torch.randperm(n_windows, generator=generator).split(config.batch_size):
                batch = TensorDict(
                    {"features": features[idx].clone(), "target": targets[idx]},
                    batch_size=[len(idx)],
                )
                if config.mask_probability > 0:
                    drop = torch.rand(len(idx), generator=generator) < config.mask_probability
                    batch["features"][drop, :, PROFILE_SLICE] = 0.0
                with GradientTape(params) as tape:
                    batch = module(batch)
                    loss = mse_loss(batch["prediction"], batch["target"])
                grads = backward(tape, loss)
                new_params, state = adam_step({k: p.detach() for k, p in params.items()}, grads, state, config)
                with torch.no_grad():
                    for k, p in params.items():
                        p.copy_(new_params[k])
                total += loss.item() * len(idx)
            epoch_loss = total / n_windows
            history.epoch_loss.append(epoch_loss)
            if logger is not None:
                logger.log_scalar("Train MSE (standardized)" if config.standardize_targets else "Train MSE",
                                  epoch_loss, step=epoch)
            pbar.update(1)
            pbar.set_description(f"{kind} epoch {epoch + 1}/{config.epochs}, loss: {epoch_loss: 4.4f}")
        pbar.close()

    model.eval()
    ckpt = Checkpoint.from_model(model, kind, dataset.feature_stats, dataset.target_stats,
                                 config.standardize_targets, config.seed, config.to_dict())
    return ckpt, history


def initial_checkpoint(kind: str, model_config: ModelConfig, dataset: Dataset, config: TrainConfig | None = None):
    """The untrained, seed-initialized model packaged like a trained one."""
    config = config or TrainConfig()
    model = build_model(kind, replace(model_config, seed=config.seed)).eval()
    return Checkpoint.from_model(model, kind, dataset.feature_stats, dataset.target_stats,
                                 config.standardize_targets, config.seed, config.to_dict())


@torch.no_grad()
def predict(model, ckpt: Checkpoint, inputs: np.ndarray) -> np.ndarray:
    """Normalized ``[F x 130]`` inputs to predicted depths in um."""
    model.eval()
    x = torch.as_tensor(inputs, dtype=ckpt.model_config.torch_dtype)
    out = model(x).to(torch.float64).numpy()
    return ckpt.target_stats.invert(out) if ckpt.standardize_targets else out


def evaluate(ckpt: Checkpoint, dataset: Dataset, tau_um: float = 1.0, mask: bool = False, split: str = "test",
             extra_taus=()) -> EvalReport:
    """Score ``ckpt`` on a split, profiles zero-filled unless ``mask`` is set."""
    samples = dataset.samples(split, mask)
    for s in samples:
        ckpt.check_compatible(s.input.shape[1], s.target.shape[1])
    model = ckpt.to_model()
    pred = np.concatenate([predict(model, ckpt, s.input) for s in samples])
    target = np.concatenate([s.target for s in samples])
    err = np.abs(pred - target)
    stats = ckpt.target_stats
    return EvalReport(
        model_name=ckpt.model_kind,
        threshold_um=tau_um,
        accuracy_pct=accuracy_within(pred, target, tau_um),
        normalized_accuracy_pct=accuracy_within(stats.apply(pred), stats.apply(target), tau_um),
        mse=mse_loss(pred, target),
        per_frame_error=err.mean(axis=1).tolist(),
        per_column_error=err.mean(axis=0).tolist(),
        mask=mask,
        extra_accuracy_pct={float(t): accuracy_within(pred, target, t) for t in extra_taus},
        config={"model_kind": ckpt.model_kind, "model": ckpt.model_config.to_dict(), "train": ckpt.train_config},
    )


def predictions(ckpt: Checkpoint, dataset: Dataset, mask: bool = False, split: str = "test"):
    """``(pred, target)`` in um over a split, concatenated across trials."""
    model = ckpt.to_model()
    samples = dataset.samples(split, mask)
    return (np.concatenate([predict(model, ckpt, s.input) for s in samples]),
            np.concatenate([s.target for s in samples]))


@dataclass(frozen=True)
class InformationCheck:
    visible_pct: float
    hidden_pct: float
    tolerance_pct: float

    @property
    def shortfall_pct(self) -> float:
        return max(0.0, self.hidden_pct - self.visible_pct)

    @property
    def ok(self) -> bool:
        return self.shortfall_pct < self.tolerance_pct


def check_profile_information(ckpt: Checkpoint, dataset: Dataset, tau_um: float = 1.0,
                              tolerance_pct: float = 1.0) -> InformationCheck:
    """Score ``ckpt`` on its own training half with the profile columns visible and zero-filled.

    Profiles only add information, so the visible score should not trail the hidden one. A
    shortfall under ``tolerance_pct`` points is logged and still passes.
    """
    visible = evaluate(ckpt, dataset, tau_um, mask=True, split="train").accuracy_pct
    hidden = evaluate(ckpt, dataset, tau_um, mask=False, split="train").accuracy_pct
    check = InformationCheck(visible, hidden, tolerance_pct)
    if check.shortfall_pct > 0:
        level = torchrl_logger.warning if check.ok else torchrl_logger.error
        level(
            f"{ckpt.model_kind}: {visible:.2f}% with profiles visible trails {hidden:.2f}% with them"
            f" zero-filled on the training half (tolerance {tolerance_pct:g} pt)"
        )
    return check
