import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd
from torchrl._utils import logger as torchrl_logger

from jetssm.data.samples import Dataset
from jetssm.errors import InvalidArgumentError
from jetssm.nn import ModelConfig
from jetssm.train.checkpoint import Checkpoint
from jetssm.train.config import TrainConfig, TrialSpace
from jetssm.train.loop import evaluate, train

MODEL_PARAMS = ("hidden_dim", "n_blocks", "dropout", "mlp_depth", "mlp_hidden", "rnn_layers")


@dataclass
class TrialResult:
    trial_id: int
    params: dict
    accuracy_pct: float
    mse: float
    wall_time_s: float
    checkpoint: Checkpoint | None = None

    def row(self) -> dict:
        return {"trial_id": self.trial_id, **self.params, "accuracy_pct": self.accuracy_pct, "mse": self.mse,
                "wall_time_s": self.wall_time_s}


@dataclass
class SearchResult:
    best: TrialResult
    leaderboard: pd.DataFrame

    def best_model_config(self, base: ModelConfig) -> ModelConfig:
        return replace(base, **{k: v for k, v in self.best.params.items() if k in MODEL_PARAMS})


def trial_configs(space: TrialSpace, base_model: ModelConfig, base_train: TrainConfig, trial_id: int, seed: int):
    """Configs for one trial; depends only on ``(seed, trial_id)``."""
    params = space.sample(np.random.default_rng([seed, trial_id]))
    model_config = replace(base_model, **{k: v for k, v in params.items() if k in MODEL_PARAMS})
    train_config = replace(base_train, learning_rate=params["learning_rate"], dropout=params["dropout"],
                           epochs=space.epochs, seed=seed + trial_id)
    return params, model_config, train_config


def run_trial(space, base_model, base_train, dataset, tau_um, trial_id, seed) -> TrialResult:
    params, model_config, train_config = trial_configs(space, base_model, base_train, trial_id, seed)
    start = time.perf_counter()
    ckpt, _ = train(space.model_kind, model_config, train_config, dataset, progress=False)
    report = evaluate(ckpt, dataset, tau_um)
    elapsed = time.perf_counter() - start
    torchrl_logger.info(
        f"trial {trial_id}: accuracy {report.accuracy_pct:.2f}% mse {report.mse:.4g} ({elapsed:.1f}s) {params}"
    )
    return TrialResult(trial_id, params, report.accuracy_pct, report.mse, elapsed, ckpt)


def _run_trial_star(args):
    return run_trial(*args)


def leaderboard_frame(results) -> pd.DataFrame:
    """Accuracy descending, then mse ascending, then trial id."""
    frame = pd.DataFrame([r.row() for r in results])
    return frame.sort_values(["accuracy_pct", "mse", "trial_id"], ascending=[False, True, True],
                             kind="mergesort").reset_index(drop=True)


def trial_search(space: TrialSpace, dataset: Dataset, base_model: ModelConfig | None = None,
                 base_train: TrainConfig | None = None, budget: int | None = None, seed: int = 0,
                 tau_um: float = 1.0, workers: int = 1) -> SearchResult:
    """Seeded random search; trial ``i`` trains with seed ``seed + i``.

    With ``workers > 1`` trials run in spawned processes, each with its own torch RNG.
    """
    budget = space.n_trials if budget is None else budget
    if budget < 1:
        raise InvalidArgumentError(f"search budget must be >= 1, got {budget}")
    if workers < 1:
        raise InvalidArgumentError(f"workers must be >= 1, got {workers}")
    base_model = base_model or ModelConfig()
    base_train = base_train or TrainConfig()
    jobs = [(space, base_model, base_train, dataset, tau_um, i, seed) for i in range(budget)]
    if workers == 1:
        results = [run_trial(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers, mp_context=multiprocessing.get_context("spawn")) as pool:
            results = list(pool.map(_run_trial_star, jobs))
    board = leaderboard_frame(results)
    best_id = int(board.iloc[0]["trial_id"])
    return SearchResult(next(r for r in results if r.trial_id == best_id), board)
