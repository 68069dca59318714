"""Diagonal state space numerics: discretization, kernels, convolution and recurrence.

Every function here is pure and broadcasts over leading dimensions, so a layer with
H channels passes parameters shaped ``[H, N]`` and gets ``H`` kernels back.

Real-output convention: with ``conj_pairs`` set, only one member of each complex
conjugate pair is stored and outputs are ``2 * Re(sum)`` over the stored half. With it
cleared, outputs are ``Re(sum)`` over all stored states.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import torch

from jetssm.errors import InvalidArgumentError, ShapeError
from jetssm.ssm.vandermonde import vandermonde

SERIES_THRESHOLD = 1e-8
DEFAULT_CHUNK = 1024
DEFAULT_MATERIALIZE_THRESHOLD = 1 << 16


class Discretization(str, Enum):
    ZOH = "zoh"
    BILINEAR = "bilinear"


def _output_scale(conj_pairs: bool) -> float:
    return 2.0 if conj_pairs else 1.0


def _as_complex(x) -> torch.Tensor:
    x = torch.as_tensor(x)
    if not x.is_complex():
        x = x.to(torch.float64).to(torch.complex128)
    return x


@dataclass(frozen=True)
class DiagonalSSM:
    """Continuous-time diagonal SSM ``x' = diag(a) x + b u``, ``y = c x``.

    ``a`` is stored as ``(log(-Re a), Im a)`` so that ``Re a < 0`` holds for any finite
    parameter value. ``n_stored`` is the trailing dimension; ``n_state`` doubles it
    under the conjugate-pair convention.
    """

    log_neg_real: torch.Tensor
    imag: torch.Tensor
    b: torch.Tensor
    c: torch.Tensor
    log_dt: torch.Tensor
    conj_pairs: bool = True
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        shape = self.log_neg_real.shape
        for name in ("imag", "b", "c"):
            if getattr(self, name).shape[-1:] != shape[-1:]:
                raise ShapeError(
                    f"{name} has {getattr(self, name).shape[-1]} states, expected {shape[-1]}"
                )
        if not self.validate:
            return
        with torch.no_grad():
            if not torch.isfinite(self.log_neg_real).all():
                raise InvalidArgumentError("log(-Re a) must be finite (Re a < 0 strictly)")
            if not torch.isfinite(self.log_dt).all():
                raise InvalidArgumentError("log_dt must be finite (timestep > 0)")
            if not (torch.isfinite(self.imag).all() and torch.isfinite(torch.view_as_real(self.b)).all()
                    and torch.isfinite(torch.view_as_real(self.c)).all()):
                raise InvalidArgumentError("SSM parameters must be finite")

    @classmethod
    def from_a(cls, a, b, c, dt, conj_pairs=True, validate=True):
        """Build from complex ``a`` directly; ``validate=False`` admits ``Re a = 0`` fixtures."""
        a, b, c = _as_complex(a), _as_complex(b), _as_complex(c)
        with torch.no_grad():
            if validate and (a.real >= 0).any():
                raise InvalidArgumentError("state matrix must be strictly stable (Re a < 0)")
        log_neg_real = torch.log(-a.real)
        log_dt = torch.log(torch.as_tensor(dt, dtype=torch.float64))
        return cls(log_neg_real, a.imag.clone(), b, c, log_dt, conj_pairs, validate)

    @classmethod
    def s4d_init(cls, n_state, channels=(), dt_min=1e-3, dt_max=1e-1, conj_pairs=True,
                 generator=None, dtype=torch.float64):
        """Diagonal initialization ``a_n = -1/2 + i*pi*n`` with ``b = 1`` and ``c ~ CN(0, 1/N)``."""
        if conj_pairs and n_state % 2:
            raise InvalidArgumentError(f"n_state must be even under the conjugate-pair convention, got {n_state}")
        n_stored = n_state // 2 if conj_pairs else n_state
        shape = (*channels, n_stored)
        log_neg_real = torch.full(shape, math.log(0.5), dtype=dtype)
        imag = (math.pi * torch.arange(n_stored, dtype=dtype)).expand(shape).clone()
        b = torch.ones(shape, dtype=dtype).to(torch.complex128 if dtype == torch.float64 else torch.complex64)
        c = torch.randn(*shape, 2, generator=generator, dtype=dtype) * math.sqrt(0.5 / n_state)
        c = torch.view_as_complex(c.contiguous())
        u = torch.rand(channels, generator=generator, dtype=dtype)
        log_dt = u * (math.log(dt_max) - math.log(dt_min)) + math.log(dt_min)
        return cls(log_neg_real, imag, b, c, log_dt, conj_pairs)

    @property
    def a(self) -> torch.Tensor:
        return torch.complex(-torch.exp(self.log_neg_real), self.imag)

    @property
    def dt(self) -> torch.Tensor:
        return torch.exp(self.log_dt)

    @property
    def n_stored(self) -> int:
        return self.log_neg_real.shape[-1]

    @property
    def n_state(self) -> int:
        return 2 * self.n_stored if self.conj_pairs else self.n_stored


@dataclass(frozen=True)
class DiscreteSSM:
    a_bar: torch.Tensor
    b_bar: torch.Tensor
    c: torch.Tensor
    method: Discretization = Discretization.ZOH
    conj_pairs: bool = True


@dataclass(frozen=True)
class Kernel:
    k: torch.Tensor

    def __post_init__(self):
        if self.k.shape[-1] < 1:
            raise InvalidArgumentError("kernel length must be at least 1")
        with torch.no_grad():
            if not torch.isfinite(self.k).all():
                raise InvalidArgumentError("kernel has non-finite entries")

    @property
    def length(self) -> int:
        return self.k.shape[-1]


def complex_expm1(z: torch.Tensor) -> torch.Tensor:
    """``exp(z) - 1`` without cancellation for small ``|z|``."""
    x, y = z.real, z.imag
    real = torch.expm1(x) * torch.cos(y) - 2.0 * torch.sin(0.5 * y) ** 2
    imag = torch.exp(x) * torch.sin(y)
    return torch.complex(real, imag)


def discretize_zoh(ssm: DiagonalSSM) -> DiscreteSSM:
    a = ssm.a
    dt = ssm.dt.unsqueeze(-1)
    dta = dt * a
    small = dta.abs() < SERIES_THRESHOLD
    safe_a = torch.where(small, torch.ones_like(a), a)
    exact = complex_expm1(dta) / safe_a
    series = dt * (1 + dta / 2 + dta * dta / 6)
    b_bar = torch.where(small, series, exact) * ssm.b
    return DiscreteSSM(torch.exp(dta), b_bar, ssm.c, Discretization.ZOH, ssm.conj_pairs)


def discretize_bilinear(ssm: DiagonalSSM) -> DiscreteSSM:
    a = ssm.a
    dt = ssm.dt.unsqueeze(-1)
    denom = 1 - dt / 2 * a
    a_bar = (1 + dt / 2 * a) / denom
    b_bar = dt * ssm.b / denom
    return DiscreteSSM(a_bar, b_bar, ssm.c, Discretization.BILINEAR, ssm.conj_pairs)


def discretize(ssm: DiagonalSSM, method=Discretization.ZOH) -> DiscreteSSM:
    method = Discretization(method)
    if method is Discretization.ZOH:
        return discretize_zoh(ssm)
    return discretize_bilinear(ssm)


def continuous_kernel(ssm: DiagonalSSM, t) -> torch.Tensor:
    """``K(t) = C exp(tA) B`` under the real-output convention."""
    t = torch.as_tensor(t, dtype=torch.float64)
    if not torch.isfinite(t).all():
        raise InvalidArgumentError("t must be finite")
    terms = ssm.c * torch.exp(t.unsqueeze(-1) * ssm.a) * ssm.b
    return _output_scale(ssm.conj_pairs) * terms.sum(-1).real


def vandermonde_kernel(dssm: DiscreteSSM, length: int, chunk_size: int = DEFAULT_CHUNK,
                       materialize_threshold: int = DEFAULT_MATERIALIZE_THRESHOLD) -> Kernel:
    """``k_l = Re-convention(sum_n c_n * a_bar_n**l * b_bar_n)`` for ``l < length``."""
    if length < 1:
        raise InvalidArgumentError(f"kernel length must be at least 1, got {length}")
    if chunk_size < 1:
        raise InvalidArgumentError(f"chunk_size must be positive, got {chunk_size}")
    n = dssm.a_bar.shape[-1]
    chunk = length if length * n <= materialize_threshold else chunk_size
    k = vandermonde(dssm.a_bar, dssm.b_bar * dssm.c, length, chunk, _output_scale(dssm.conj_pairs))
    return Kernel(k)


def causal_conv(u: torch.Tensor, k) -> torch.Tensor:
    """``y_t = sum_{l <= t} k_l u_{t-l}`` via FFT with ``2L`` zero padding."""
    k = k.k if isinstance(k, Kernel) else k
    length = u.shape[-1]
    if k.shape[-1] != length:
        raise InvalidArgumentError(f"signal length {length} does not match kernel length {k.shape[-1]}")
    n = 2 * length
    y = torch.fft.irfft(torch.fft.rfft(u, n=n) * torch.fft.rfft(k, n=n), n=n)
    return y[..., :length]


def recurrent_step(dssm: DiscreteSSM, state: torch.Tensor, u_k):
    """One step of ``x' = a_bar x + b_bar u``; returns ``(x', y)`` with ``y`` read from ``x'``."""
    u_k = torch.as_tensor(u_k, dtype=dssm.a_bar.real.dtype)
    state = dssm.a_bar * state + dssm.b_bar * u_k.unsqueeze(-1)
    y = _output_scale(dssm.conj_pairs) * (dssm.c * state).sum(-1).real
    return state, y


def zero_state(dssm: DiscreteSSM, batch_shape=()) -> torch.Tensor:
    return torch.zeros(*batch_shape, *dssm.a_bar.shape, dtype=dssm.a_bar.dtype)
