import torch
from torch import nn

from jetssm.errors import ShapeError, UnsupportedModeError
from jetssm.nn.config import ModelConfig
from jetssm.ssm import DiagonalSSM, Discretization, causal_conv, discretize, recurrent_step, vandermonde_kernel, zero_state


class S4DLayer(nn.Module):
    """H independent diagonal SSMs applied channel-wise to ``[batch, H, length]`` inputs.

    Parameters are kept in the real parameterization (``log(-Re a)``, ``Im a``, ``log_dt``
    and real views of ``b``/``c``) so optimizer updates never leave the stable region.
    Kernel math always runs in float64 whatever dtype the rest of the model uses.
    """

    def __init__(self, channels, n_state, shared_a=False, conj_pairs=True, dt_min=1e-3, dt_max=1e-1,
                 method=Discretization.ZOH):
        super().__init__()
        self.channels = channels
        self.conj_pairs = conj_pairs
        self.method = Discretization(method)
        init = DiagonalSSM.s4d_init(n_state, channels=(channels,), dt_min=dt_min, dt_max=dt_max,
                                    conj_pairs=conj_pairs)
        a_rows = 1 if shared_a else channels
        self.log_neg_real = nn.Parameter(init.log_neg_real[:a_rows].clone())
        self.imag = nn.Parameter(init.imag[:a_rows].clone())
        self.b = nn.Parameter(torch.view_as_real(init.b).clone())
        self.c = nn.Parameter(torch.view_as_real(init.c).clone())
        self.log_dt = nn.Parameter(init.log_dt.clone())

    def ssm(self) -> DiagonalSSM:
        return DiagonalSSM(
            self.log_neg_real.double(),
            self.imag.double(),
            torch.view_as_complex(self.b.double()),
            torch.view_as_complex(self.c.double()),
            self.log_dt.double(),
            self.conj_pairs,
        )

    def discrete(self):
        return discretize(self.ssm(), self.method)

    def kernel(self, length: int) -> torch.Tensor:
        return vandermonde_kernel(self.discrete(), length).k

    def forward(self, u: torch.Tensor) -> torch.Tensor:
        if u.shape[-2] != self.channels:
            raise ShapeError(f"SSM layer expects {self.channels} channels, got {u.shape[-2]}")
        k = self.kernel(u.shape[-1])
        return causal_conv(u.double(), k).to(u.dtype)

    def step(self, dssm, state, u_t):
        state, y = recurrent_step(dssm, state, u_t.double())
        return state, y.to(u_t.dtype)


class S4DBlock(nn.Module):
    """Pre-norm residual block ``x + Dropout(Act(SSM(Norm(x)) + d * Norm(x)))`` on ``[batch, L, H]``."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        h = config.hidden_dim
        self.norm_kind = config.norm_kind
        self.norm = nn.BatchNorm1d(h) if config.norm_kind == "batch" else nn.LayerNorm(h)
        self.layer = S4DLayer(h, config.n_state, config.shared_a, config.conj_pairs, config.dt_min,
                              config.dt_max, config.discretization)
        self.use_feedthrough = config.use_feedthrough
        # per-channel skip term, standard normal at init
        self.d = nn.Parameter(torch.randn(h)) if config.use_feedthrough else None
        self.activation = nn.GELU() if config.activation == "gelu" else nn.Identity()
        self.dropout = nn.Dropout(config.dropout)

    def normalize(self, x):
        if self.norm_kind == "batch" and x.ndim == 3:
            return self.norm(x.transpose(-1, -2)).transpose(-1, -2)
        return self.norm(x)

    def mix(self, z, mixed):
        """Everything between the SSM output and the residual add."""
        if self.use_feedthrough:
            mixed = mixed + self.d * z
        return self.dropout(self.activation(mixed))

    def forward(self, x):
        if x.shape[-1] != self.layer.channels:
            raise ShapeError(f"block expects {self.layer.channels} channels, got {x.shape[-1]}")
        z = self.normalize(x)
        mixed = self.layer(z.transpose(-1, -2)).transpose(-1, -2)
        return x + self.mix(z, mixed)

    def step(self, dssm, state, x_t):
        z = self.normalize(x_t)
        state, mixed = self.layer.step(dssm, state, z)
        return x_t + self.mix(z, mixed), state


class S4DRegressor(nn.Module):
    """Linear encoder, ``n_blocks`` S4D blocks, linear decoder; maps ``[..., L, 130]`` to ``[..., L, 70]``."""

    supports_streaming = True

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.encoder = nn.Linear(config.in_channels, config.hidden_dim)
        self.blocks = nn.ModuleList(S4DBlock(config) for _ in range(config.n_blocks))
        self.decoder = nn.Linear(config.hidden_dim, config.out_channels)

    @classmethod
    def from_config(cls, config: ModelConfig):
        return cls(config)

    def forward(self, features):
        squeeze = features.ndim == 2
        x = features.unsqueeze(0) if squeeze else features
        if x.shape[-1] != self.config.in_channels:
            raise ShapeError(f"model expects {self.config.in_channels} input channels, got {x.shape[-1]}")
        x = self.encoder(x)
        for block in self.blocks:
            x = block(x)
        y = self.decoder(x)
        return y.squeeze(0) if squeeze else y

    def stream(self, batch_size: int = 1) -> "S4DStream":
        return S4DStream(self, batch_size)


class S4DStream:
    """Frame-by-frame inference through the recurrent view of every block.

    Holds one discretized system and one ``[batch, H, N]`` state per block, so memory
    does not grow with the number of frames pushed.
    """

    def __init__(self, model: S4DRegressor, batch_size: int = 1):
        if model.training:
            raise UnsupportedModeError("streaming inference requires an eval-mode model")
        self.model = model
        with torch.no_grad():
            self.systems = [block.layer.discrete() for block in model.blocks]
        self.states = [zero_state(dssm, (batch_size,)) for dssm in self.systems]

    @torch.no_grad()
    def step(self, frame: torch.Tensor) -> torch.Tensor:
        squeeze = frame.ndim == 1
        x = frame.unsqueeze(0) if squeeze else frame
        if x.shape[-1] != self.model.config.in_channels:
            raise ShapeError(f"frame has {x.shape[-1]} channels, expected {self.model.config.in_channels}")
        x = self.model.encoder(x)
        for i, block in enumerate(self.model.blocks):
            x, self.states[i] = block.step(self.systems[i], self.states[i], x)
        y = self.model.decoder(x)
        return y.squeeze(0) if squeeze else y
