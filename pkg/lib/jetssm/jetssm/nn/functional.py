"""SequenceTensor-level entry points for the model operations.

These wrap the ``nn.Module`` implementations for callers that work with single
``[frames x channels]`` sequences instead of batches.
"""

import torch

from jetssm.errors import ShapeError
from jetssm.nn.baselines import MLPRegressor, RecurrentRegressor
from jetssm.nn.s4d import S4DBlock
from jetssm.nn.tensor import SequenceTensor


def _mode(module: torch.nn.Module, training: bool):
    was_training = module.training
    module.train(training)
    return was_training


def encoder_forward(x: SequenceTensor, encoder: torch.nn.Linear) -> SequenceTensor:
    x.expect_channels(encoder.in_features)
    return SequenceTensor(encoder(x.data))


def s4d_block_forward(x: SequenceTensor, block: S4DBlock, training: bool = False) -> SequenceTensor:
    x.expect_channels(block.layer.channels)
    was_training = _mode(block, training)
    try:
        return SequenceTensor(block(x.data.unsqueeze(0)).squeeze(0))
    finally:
        block.train(was_training)


def model_forward(x: SequenceTensor, model: torch.nn.Module, training: bool = False) -> SequenceTensor:
    x.expect_channels(model.config.in_channels)
    was_training = _mode(model, training)
    try:
        return SequenceTensor(model(x.data))
    finally:
        model.train(was_training)


def gru_forward(x: SequenceTensor, model: RecurrentRegressor) -> SequenceTensor:
    if model.cell != "gru":
        raise ShapeError(f"expected a GRU regressor, got {model.cell}")
    return model_forward(x, model)


def mlp_forward(x: SequenceTensor, model: MLPRegressor) -> SequenceTensor:
    return model_forward(x, model)
