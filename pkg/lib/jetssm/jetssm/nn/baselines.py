from torch import nn
from torchrl.modules import MLP

from jetssm.errors import InvalidArgumentError, ShapeError
from jetssm.nn.config import ModelConfig


def _check_channels(x, expected):
    if x.shape[-1] != expected:
        raise ShapeError(f"model expects {expected} input channels, got {x.shape[-1]}")


class RecurrentRegressor(nn.Module):
    """GRU or LSTM over frames followed by a per-frame linear readout."""

    supports_streaming = False

    def __init__(self, config: ModelConfig, cell: str = "gru"):
        super().__init__()
        if cell not in ("gru", "lstm"):
            raise InvalidArgumentError(f"cell must be 'gru' or 'lstm', got {cell!r}")
        self.config = config
        self.cell = cell
        rnn_class = nn.GRU if cell == "gru" else nn.LSTM
        self.rnn = rnn_class(
            input_size=config.in_channels,
            hidden_size=config.hidden_dim,
            num_layers=config.rnn_layers,
            dropout=config.dropout if config.rnn_layers > 1 else 0.0,
            batch_first=True,
        )
        self.readout = nn.Linear(config.hidden_dim, config.out_channels)

    @classmethod
    def from_config(cls, config: ModelConfig, cell: str = "gru"):
        return cls(config, cell)

    def forward(self, features, hidden=None):
        _check_channels(features, self.config.in_channels)
        squeeze = features.ndim == 2
        x = features.unsqueeze(0) if squeeze else features
        out, _ = self.rnn(x, hidden)
        y = self.readout(out)
        return y.squeeze(0) if squeeze else y


class MLPRegressor(nn.Module):
    """Frame-wise fully connected stack; frame ``t`` only ever sees input frame ``t``."""

    supports_streaming = False

    def __init__(self, config: ModelConfig, depth: int | None = None):
        super().__init__()
        self.config = config
        self.depth = config.mlp_depth if depth is None else depth
        if self.depth < 1:
            raise InvalidArgumentError(f"MLP depth must be >= 1, got {self.depth}")
        self.mlp = MLP(
            in_features=config.in_channels,
            out_features=config.out_channels,
            num_cells=[config.mlp_hidden] * self.depth,
            activation_class=nn.ReLU,
            dropout=config.dropout if config.dropout > 0 else None,
        )

    @classmethod
    def from_config(cls, config: ModelConfig, depth: int | None = None):
        return cls(config, depth)

    def forward(self, features):
        _check_channels(features, self.config.in_channels)
        return self.mlp(features)
