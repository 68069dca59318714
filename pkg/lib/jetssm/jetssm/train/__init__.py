from jetssm.train.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from jetssm.train.config import TrainConfig, TrialSpace
from jetssm.train.loggers import make_logger
from jetssm.train.loop import (
    History,
    InformationCheck,
    check_profile_information,
    evaluate,
    initial_checkpoint,
    make_windows,
    predict,
    predictions,
    train,
)
from jetssm.train.metrics import EvalReport, accuracy_within, mse_loss
from jetssm.train.optim import AdamState, adam_step
from jetssm.train.search import SearchResult, TrialResult, trial_search
from jetssm.train.stream import stream_blocks, stream_predict

__all__ = [
    "AdamState",
    "Checkpoint",
    "EvalReport",
    "History",
    "InformationCheck",
    "SearchResult",
    "TrainConfig",
    "TrialResult",
    "TrialSpace",
    "accuracy_within",
    "adam_step",
    "check_profile_information",
    "evaluate",
    "initial_checkpoint",
    "load_checkpoint",
    "make_logger",
    "make_windows",
    "mse_loss",
    "predict",
    "predictions",
    "save_checkpoint",
    "stream_blocks",
    "stream_predict",
    "train",
    "trial_search",
]
