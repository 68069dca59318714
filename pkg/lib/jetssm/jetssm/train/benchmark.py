from dataclasses import replace

import numpy as np
import pandas as pd
from torchrl._utils import logger as torchrl_logger

from jetssm.data.pipeline import dataset_from_trials
from jetssm.data.schedule import StairsSchedule
from jetssm.data.synth import GeneratorConfig, synthesize_trial
from jetssm.nn import TABLE_KINDS, ModelConfig
from jetssm.train.config import TrainConfig
from jetssm.train.loop import evaluate, initial_checkpoint, train


def run_benchmark(seeds, kinds=TABLE_KINDS, model_config: ModelConfig | None = None,
                  train_config: TrainConfig | None = None, generator: GeneratorConfig | None = None,
                  schedule: StairsSchedule | None = None, tau_um: float = 1.0, logger=None,
                  progress: bool = False) -> pd.DataFrame:
    """Train and score every kind on one synthetic trial per seed.

    Rows carry accuracy at ``tau_um`` and at the generator's noise-scaled threshold, plus the
    same numbers for the untrained model of that kind.
    """
    model_config = model_config or ModelConfig()
    train_config = train_config or TrainConfig()
    generator = generator or GeneratorConfig()
    schedule = schedule or StairsSchedule()
    synthetic_tau = generator.synthetic_tau_um
    rows = []
    for seed in seeds:
        dataset = dataset_from_trials([synthesize_trial(seed, schedule, generator)])
        for kind in kinds:
            config = replace(train_config, seed=seed)
            ckpt, history = train(kind, model_config, config, dataset, progress=progress)
            trained = evaluate(ckpt, dataset, tau_um, extra_taus=[synthetic_tau])
            untrained = evaluate(initial_checkpoint(kind, model_config, dataset, config), dataset, tau_um,
                                 extra_taus=[synthetic_tau])
            row = {
                "seed": seed,
                "model": kind,
                "accuracy_pct": trained.accuracy_pct,
                "synthetic_accuracy_pct": trained.extra_accuracy_pct[float(synthetic_tau)],
                "normalized_accuracy_pct": trained.normalized_accuracy_pct,
                "mse": trained.mse,
                "untrained_synthetic_accuracy_pct": untrained.extra_accuracy_pct[float(synthetic_tau)],
                "untrained_mse": untrained.mse,
                "final_train_loss": history.epoch_loss[-1],
            }
            rows.append(row)
            if logger is not None:
                logger.log_scalar(f"{kind} synthetic accuracy", row["synthetic_accuracy_pct"], step=seed)
                logger.log_scalar(f"{kind} MSE", row["mse"], step=seed)
            torchrl_logger.info(
                f"seed {seed} {kind}: {row['synthetic_accuracy_pct']:.2f}% within {synthetic_tau:.1f} um"
                f" (untrained {row['untrained_synthetic_accuracy_pct']:.2f}%), mse {row['mse']:.4g}"
            )
    frame = pd.DataFrame(rows)
    ordering_ok = check_baseline_ordering(frame)
    frame.attrs["ordering_ok"] = ordering_ok
    frame.attrs["synthetic_tau_um"] = synthetic_tau
    return frame


def check_baseline_ordering(frame: pd.DataFrame, column: str = "synthetic_accuracy_pct") -> bool | None:
    """Median S4D accuracy against the shallow MLP; a shortfall is logged, never raised."""
    models = set(frame["model"])
    if not {"s4d", "mlp_shallow"} <= models:
        return None
    s4d = float(np.median(frame.loc[frame["model"] == "s4d", column]))
    mlp = float(np.median(frame.loc[frame["model"] == "mlp_shallow", column]))
    if s4d < mlp:
        torchrl_logger.warning(
            f"FLAGGED: median s4d accuracy {s4d:.2f}% is below median mlp_shallow accuracy {mlp:.2f}%"
        )
        return False
    return True


def comparison_table(frame: pd.DataFrame) -> pd.DataFrame:
    """One row per model: median accuracy and mse over seeds."""
    return (
        frame.groupby("model", sort=False)
        .agg(accuracy_pct=("accuracy_pct", "median"), synthetic_accuracy_pct=("synthetic_accuracy_pct", "median"),
             mse=("mse", "median"), seeds=("seed", "count"))
        .reset_index()
    )
